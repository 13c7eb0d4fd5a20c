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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "guru/util/error.hpp"

using namespace guru;
using namespace guru::cdsrec;
using nn::Matrix;

namespace {

double bpr_value(const Matrix& q, const Matrix& table, const std::vector<int>& pos,
                 const std::vector<std::vector<int>>& neg) {
  nn::Tape tape;
  return bpr_loss(tape.constant(q), tape.constant(table), pos, neg).scalar();
}

struct Setup {
  model::ModelDims dims = testing::tiny_dims();
  model::EmbeddingTables tables{"t", 10, dims.max_len + 1, dims.d};
  Recommender rec{"rec", dims, 4};

  explicit Setup(std::uint64_t seed) {
    Rng rng(seed);
    tables.init(rng);
    rec.init(rng);
  }

  Eigen::RowVectorXd q(const std::vector<int>& history, const Matrix& gur) {
    nn::Tape tape;
    model::Pass pass{&tape, 0.0, nullptr};
    const auto w = window_batch({history}, rec.window(), 10);
    return preference_vectors(pass, rec, tables, w, tape.constant(gur), false, false).value().row(0);
  }
};

std::vector<int> argsort(const std::vector<double>& s) {
  std::vector<int> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return s[a] > s[b]; });
  return idx;
}

}  // namespace

TEST_SUITE("cdsrec") {

TEST_CASE("window batch keeps the most recent items") {
  const auto w = window_batch({{1, 2, 3, 4, 5, 6}, {7}}, 4, 10);
  CHECK(w.tokens == std::vector<int>{3, 4, 5, 6, 0, 0, 0, 7});
  CHECK(w.mask == std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0, 0, 1});
  CHECK_THROWS_AS(window_batch({{}}, 4, 10), InvariantError);
  CHECK_THROWS_AS(window_batch({{11}}, 4, 10), LookupError);
}

TEST_CASE("scores are inner products with item rows") {
  Setup s(1);
  const Eigen::RowVectorXd iv = s.tables.item_table.value.row(4);
  CHECK(std::abs(score(iv / iv.squaredNorm(), {4}, s.tables)[0] - 1.0) < 1e-12);
  for (double v : score(Eigen::RowVectorXd::Zero(8), {1, 2, 3}, s.tables)) CHECK(v == 0.0);

  Rng rng(2);
  const Eigen::RowVectorXd q = Eigen::RowVectorXd::Random(8);
  const std::vector<int> cand = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto base = score(q, cand, s.tables);
  CHECK(argsort(score(q * 3.5, cand, s.tables)) == argsort(base));
  std::vector<double> transformed;
  for (double v : base) transformed.push_back(std::tanh(v) + v * v * v);
  CHECK(argsort(transformed) == argsort(base));
  CHECK_THROWS_AS(score(q, {0}, s.tables), InvariantError);
}

TEST_CASE("bpr loss closed forms and monotonicity") {
  Rng rng(3);
  const Matrix table = testing::random_matrix(12, 8, rng);
  const Matrix zero_q = Matrix::Zero(1, 8);
  CHECK(std::abs(bpr_value(zero_q, table, {1}, {{2, 3}}) - 2.0 * std::log(2.0)) < 1e-12);

  // Push the positive score up and the negative mean down.
  Matrix t = Matrix::Zero(12, 8);
  t(1, 0) = 1.0;
  t(2, 0) = -1.0;
  Matrix q = Matrix::Zero(1, 8);
  q(0, 0) = 60.0;
  CHECK(bpr_value(q, t, {1}, {{2}}) < 1e-20);

  // Loss strictly decreases in the positive score, negatives fixed.
  Matrix grid_table = Matrix::Zero(12, 8);
  grid_table(2, 1) = 1.0;
  Matrix gq = Matrix::Zero(1, 8);
  gq(0, 1) = 0.3;
  double prev = INFINITY;
  for (double sp = -5.0; sp <= 5.0; sp += 0.25) {
    grid_table(1, 1) = sp / 0.3;
    const double l = bpr_value(gq, grid_table, {1}, {{2}});
    CHECK(l < prev);
    prev = l;
  }
  CHECK_THROWS_AS(bpr_value(zero_q, table, {1}, {{}}), InvariantError);
  CHECK_THROWS_AS(bpr_value(zero_q, table, {1}, {{1, 2}}), InvariantError);
}

TEST_CASE("bpr gradient matches finite differences") { CHECK(testing::bpr_grad_error() < 1e-4); }

TEST_CASE("preference vector structure") {
  Setup s(4);
  Rng rng(5);
  const Matrix gur = testing::random_matrix(1, 8, rng);
  const auto q1 = s.q({1, 2, 3}, gur);
  CHECK(s.q({1, 2, 3}, gur) == q1);
  CHECK((s.q({4, 5, 6}, gur) - q1).norm() > 0.0);
  CHECK((s.q({1, 2, 3}, Matrix::Zero(1, 8)) - q1).norm() > 0.0);

  // With m = 1 only the last item, its position and the GUR matter.
  Recommender narrow("narrow", s.dims, 1);
  narrow.init(rng);
  auto q_narrow = [&](const std::vector<int>& h) {
    nn::Tape tape;
    model::Pass pass{&tape, 0.0, nullptr};
    const auto w = window_batch({h}, 1, 10);
    return Eigen::RowVectorXd(
        preference_vectors(pass, narrow, s.tables, w, tape.constant(gur), false, false).value().row(0));
  };
  CHECK(q_narrow({9, 8, 7}) == q_narrow({7}));
  CHECK(q_narrow({1, 2, 3}) == q_narrow({5, 3}));
}

TEST_CASE("zero-context recommender has the same parameter shapes") {
  Setup s(6);
  Recommender other("rec", s.dims, 4);
  auto a = s.rec.parameters();
  auto b = other.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i]->name == b[i]->name);
    CHECK(a[i]->value.rows() == b[i]->value.rows());
    CHECK(a[i]->value.cols() == b[i]->value.cols());
  }
}

}  // TEST_SUITE
