// Copyright 2026 The guru Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "guru/util/error.hpp"

using namespace guru;
using namespace guru::adversary;
using nn::Matrix;

namespace {

// f(h) = w·h: the first unit of every layer carries w·h + 100, the rest
// are zero, and the output removes the offset.
Critic linear_critic(const Eigen::RowVectorXd& w) {
  const int d = static_cast<int>(w.size());
  Critic c(d, 8);
  c.w1.value.col(0) = w.transpose();
  c.b1.value(0, 0) = 100.0;
  c.w2.value(0, 0) = 1.0;
  c.w3.value(0, 0) = 1.0;
  c.w4.value(0, 0) = 1.0;
  c.b4.value(0, 0) = -100.0;
  return c;
}

Critic constant_critic(int d, double value) {
  Critic c(d, 8);
  c.b4.value(0, 0) = value;
  return c;
}

double critic_value(Critic& c, const Matrix& a, const Matrix& b, const AdversaryConfig& cfg,
                    CriticDiagnostics* diag = nullptr) {
  nn::Tape tape;
  model::Pass pass{&tape, 0.0, nullptr};
  Rng rng(3);
  return critic_loss(pass, c, tape.constant(a), tape.constant(b), cfg, rng, diag).scalar();
}

double generator_value(Critic& c, const Matrix& a, const Matrix& b,
                       AdversaryMode mode = AdversaryMode::wgan_gp) {
  nn::Tape tape;
  model::Pass pass{&tape, 0.0, nullptr};
  return generator_adv_loss(pass, c, tape.constant(a), tape.constant(b), mode).scalar();
}

double l2_value(const Matrix& a, const Matrix& b) {
  nn::Tape tape;
  return l2_overlap_loss(tape, tape.constant(a), tape.constant(b)).scalar();
}

}  // namespace

TEST_SUITE("adversary") {

TEST_CASE("critic score basics") {
  Critic zero(8);
  Rng rng(1);
  const Eigen::RowVectorXd h = Eigen::RowVectorXd::Random(8);
  CHECK(critic_score(zero, h) == 0.0);

  Critic c(8);
  c.init(rng);
  const double f = critic_score(c, h);
  CHECK(critic_score(c, h) == f);
  double prev = 1.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const double gap = std::abs(critic_score(c, h.array() + eps) - f);
    CHECK(gap <= prev);
    prev = gap;
  }
  CHECK(prev < 1e-6);

  const Eigen::RowVectorXd w = (Eigen::RowVectorXd(3) << 0.6, -0.8, 0.0).finished();
  Critic lin = linear_critic(w);
  const Eigen::RowVectorXd x = (Eigen::RowVectorXd(3) << 1.0, 2.0, 3.0).finished();
  CHECK(critic_score(lin, x) == doctest::Approx(w.dot(x)).epsilon(1e-12));
}

TEST_CASE("closed-form critic losses") {
  Rng rng(2);
  const Matrix a = testing::random_matrix(6, 3, rng);
  const Matrix b = testing::random_matrix(6, 3, rng);
  AdversaryConfig no_gp;
  no_gp.lambda_gp = 0.0;
  Critic constant = constant_critic(3, 2.5);
  CHECK(critic_value(constant, a, b, no_gp) == 0.0);

  // Unit-norm linear critic: the penalty vanishes.
  Critic unit = linear_critic((Eigen::RowVectorXd(3) << 0.6, 0.8, 0.0).finished());
  AdversaryConfig cfg;
  CriticDiagnostics diag;
  critic_value(unit, a, b, cfg, &diag);
  CHECK(std::abs(diag.penalty) < 1e-12);

  // ||∇f|| = 3 everywhere, so the penalty is (3 − 1)² = 4.
  Critic steep = linear_critic((Eigen::RowVectorXd(3) << 1.8, 2.4, 0.0).finished());
  const double loss = critic_value(steep, a, b, cfg, &diag);
  CHECK(std::abs(diag.penalty - 4.0) < 1e-6);
  const Eigen::RowVectorXd w = (Eigen::RowVectorXd(3) << 1.8, 2.4, 0.0).finished();
  const double expected_w = (a * w.transpose()).mean() - (b * w.transpose()).mean();
  CHECK(std::abs(diag.wasserstein - expected_w) < 1e-9);
  CHECK(std::abs(loss - (-expected_w + 10.0 * 4.0)) < 1e-9);

  // Constant critic has zero input gradient: penalty is exactly one.
  critic_value(constant, a, b, cfg, &diag);
  CHECK(diag.penalty == 1.0);

  AdversaryConfig nll;
  nll.mode = AdversaryMode::nll;
  Critic zero(3);
  CHECK(critic_value(zero, a, b, nll) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("generator loss symmetry and boundaries") {
  Rng rng(4);
  Critic c(5);
  c.init(rng);
  const Matrix a = testing::random_matrix(7, 5, rng);
  const Matrix b = testing::random_matrix(7, 5, rng);
  CHECK(generator_value(c, a, b) == -generator_value(c, b, a));
  Critic constant = constant_critic(5, -1.5);
  CHECK(generator_value(constant, a, b) == 0.0);
  const Matrix one = testing::random_matrix(1, 5, rng);
  CHECK(generator_value(c, one, one) == 0.0);
  Critic zero(5);
  CHECK(generator_value(zero, a, b, AdversaryMode::nll) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(generator_value(c, a, testing::random_matrix(7, 4, rng)), InvariantError);
}

TEST_CASE("generator loss is centered for identically distributed batches") {
  Rng rng(5);
  Critic c(6);
  c.init(rng);
  std::vector<double> values;
  for (int s = 0; s < 100; ++s)
    values.push_back(generator_value(c, testing::random_matrix(32, 6, rng),
                                     testing::random_matrix(32, 6, rng)));
  double mean = 0.0, var = 0.0;
  for (double v : values) mean += v / values.size();
  for (double v : values) var += (v - mean) * (v - mean) / (values.size() - 1);
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / values.size()));
}

TEST_CASE("l2 overlap loss closed forms and metric properties") {
  Matrix e1 = Matrix::Zero(1, 8), e2 = Matrix::Zero(1, 8);
  e1(0, 0) = 1.0;
  e2(0, 1) = 1.0;
  CHECK(std::abs(l2_value(e1, e2) - std::sqrt(2.0)) < 1e-12);
  CHECK(l2_value(e1, e1) == 0.0);
  CHECK(l2_value(Matrix(0, 8), Matrix(0, 8)) == 0.0);
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = testing::random_matrix(4, 8, rng);
    const Matrix b = testing::random_matrix(4, 8, rng);
    CHECK(l2_value(a, b) > 0.0);
    CHECK(l2_value(a, b) == l2_value(b, a));
  }
  CHECK_THROWS_AS(l2_value(e1, Matrix::Zero(1, 7)), InvariantError);
}

TEST_CASE("adversary gradients match finite differences") {
  CHECK(testing::critic_grad_error(AdversaryMode::wgan_gp) < 1e-4);
  CHECK(testing::critic_grad_error(AdversaryMode::nll) < 1e-4);
  CHECK(testing::generator_grad_error(AdversaryMode::wgan_gp) < 1e-4);
  CHECK(testing::generator_grad_error(AdversaryMode::nll) < 1e-4);
  CHECK(testing::l2_grad_error() < 1e-4);
}

TEST_CASE("adversary config validation") {
  AdversaryConfig cfg;
  cfg.critic_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.critic_iters = 5;
  cfg.lambda_gp = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(parse_adversary_mode("nll") == AdversaryMode::nll);
  CHECK_THROWS_AS(parse_adversary_mode("gan"), ConfigError);
}

}  // TEST_SUITE
