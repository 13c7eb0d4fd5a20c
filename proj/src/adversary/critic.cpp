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

#include "guru/adversary/critic.hpp"

#include "guru/util/error.hpp"

namespace guru::adversary {

AdversaryMode parse_adversary_mode(const std::string& s) {
  if (s == "wgan_gp") return AdversaryMode::wgan_gp;
  if (s == "nll") return AdversaryMode::nll;
  throw ConfigError("unknown adversary mode '" + s + "' (expected wgan_gp or nll)");
}

const char* adversary_mode_name(AdversaryMode m) {
  return m == AdversaryMode::wgan_gp ? "wgan_gp" : "nll";
}

void AdversaryConfig::validate() const {
  if (critic_iters < 1) throw ConfigError("adversary.critic_iters must be >= 1");
  if (!(lambda_gp >= 0.0)) throw ConfigError("adversary.lambda_gp must be >= 0");
}

Critic::Critic(int d, int hidden)
    : w1("critic.w1", d, hidden), b1("critic.b1", 1, hidden),
      w2("critic.w2", hidden, hidden), b2("critic.b2", 1, hidden),
      w3("critic.w3", hidden, hidden), b3("critic.b3", 1, hidden),
      w4("critic.w4", hidden, 1), b4("critic.b4", 1, 1) {}

void Critic::init(Rng& rng) {
  for (Parameter* w : {&w1, &w2, &w3, &w4}) nn::init_xavier_uniform(*w, rng);
  for (Parameter* b : {&b1, &b2, &b3, &b4}) b->value.setZero();
}

ParameterList Critic::parameters() { return {&w1, &b1, &w2, &b2, &w3, &b3, &w4, &b4}; }

namespace {

Var affine(const Pass& pass, Var x, Parameter& w, Parameter& b, bool trainable) {
  return nn::add_bias(nn::matmul(x, pass.bind(w, trainable)), pass.bind(b, trainable));
}

Matrix slope_mask(const Matrix& z) {
  return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : Critic::kSlope; });
}

}  // namespace

Var Critic::score(const Pass& pass, Var h, bool trainable) {
  Var a = nn::leaky_relu(affine(pass, h, w1, b1, trainable), kSlope);
  a = nn::leaky_relu(affine(pass, a, w2, b2, trainable), kSlope);
  a = nn::leaky_relu(affine(pass, a, w3, b3, trainable), kSlope);
  return affine(pass, a, w4, b4, trainable);
}

Var Critic::input_gradient(const Pass& pass, const Matrix& points, bool trainable) {
  nn::Tape& tape = *pass.tape;
  // Forward values only, for the activation slopes.
  const Matrix z1 = (points * w1.value).rowwise() + b1.value.row(0);
  const Matrix d1 = slope_mask(z1);
  const Matrix a1 = z1.cwiseProduct(d1);
  const Matrix z2 = (a1 * w2.value).rowwise() + b2.value.row(0);
  const Matrix d2 = slope_mask(z2);
  const Matrix a2 = z2.cwiseProduct(d2);
  const Matrix z3 = (a2 * w3.value).rowwise() + b3.value.row(0);
  const Matrix d3 = slope_mask(z3);

  Var ones = tape.constant(Matrix::Ones(points.rows(), 1));
  Var v = nn::mul_const(nn::matmul_nt(ones, pass.bind(w4, trainable)), d3);
  v = nn::mul_const(nn::matmul_nt(v, pass.bind(w3, trainable)), d2);
  v = nn::mul_const(nn::matmul_nt(v, pass.bind(w2, trainable)), d1);
  return nn::matmul_nt(v, pass.bind(w1, trainable));
}

double critic_score(Critic& critic, const Eigen::RowVectorXd& h) {
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  Matrix m = h;
  return critic.score(pass, tape.constant(m), false).scalar();
}

Var gradient_penalty(const Pass& pass, Critic& critic, const Matrix& points, bool trainable) {
  Var norm = nn::row_l2_norm(critic.input_gradient(pass, points, trainable));
  return nn::mean(nn::square(nn::add_scalar(norm, -1.0)));
}

namespace {

void check_batches(Var a, Var b) {
  if (a.rows() == 0 || b.rows() == 0) throw InvariantError("critic: batches must be nonempty");
  if (a.cols() != b.cols()) throw InvariantError("critic: batch dimensions differ");
}

Var nll(Var f_a, Var f_b) {
  // −ln σ(f) = softplus(−f) for label 1, −ln(1 − σ(f)) = softplus(f) for 0.
  Var la = nn::sum(nn::softplus(nn::scale(f_a, -1.0)));
  Var lb = nn::sum(nn::softplus(f_b));
  return nn::scale(nn::add(la, lb), 1.0 / static_cast<double>(f_a.rows() + f_b.rows()));
}

}  // namespace

Var critic_loss(const Pass& pass, Critic& critic, Var batch_a, Var batch_b,
                const AdversaryConfig& cfg, Rng& rng, CriticDiagnostics* diag) {
  check_batches(batch_a, batch_b);
  Var f_a = critic.score(pass, batch_a, true);
  Var f_b = critic.score(pass, batch_b, true);
  if (diag) diag->wasserstein = f_a.value().mean() - f_b.value().mean();
  if (cfg.mode == AdversaryMode::nll) return nll(f_a, f_b);

  Var loss = nn::sub(nn::mean(f_b), nn::mean(f_a));
  if (cfg.lambda_gp > 0.0) {
    if (batch_a.rows() != batch_b.rows())
      throw InvariantError("critic: gradient penalty needs equally sized batches");
    Matrix points(batch_a.rows(), batch_a.cols());
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
      const double eps = rng.uniform();
      points.row(r) = eps * batch_a.value().row(r) + (1.0 - eps) * batch_b.value().row(r);
    }
    Var gp = gradient_penalty(pass, critic, points, true);
    if (diag) diag->penalty = gp.scalar();
    loss = nn::add(loss, nn::scale(gp, cfg.lambda_gp));
  }
  return loss;
}

Var generator_adv_loss(const Pass& pass, Critic& critic, Var batch_a, Var batch_b,
                       AdversaryMode mode) {
  check_batches(batch_a, batch_b);
  Var f_a = critic.score(pass, batch_a, false);
  Var f_b = critic.score(pass, batch_b, false);
  if (mode == AdversaryMode::nll) return nn::scale(nll(f_a, f_b), -1.0);
  return nn::sub(nn::mean(f_a), nn::mean(f_b));
}

Var l2_overlap_loss(nn::Tape& tape, Var h_a, Var h_b) {
  if (h_a.rows() != h_b.rows() || h_a.cols() != h_b.cols())
    throw InvariantError("l2_overlap_loss: pair dimensions differ");
  if (h_a.rows() == 0) return tape.constant(Matrix::Zero(1, 1));
  return nn::mean(nn::row_l2_norm(nn::sub(h_a, h_b)));
}

}  // namespace guru::adversary
