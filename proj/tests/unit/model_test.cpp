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
#include <set>

#include "fixtures.hpp"
#include "guru/util/error.hpp"

using namespace guru;
using namespace guru::model;
using corpus::Domain;

namespace {

Matrix encode_states(Autoencoder& ae, Domain d, const TokenBatch& batch) {
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  return encode(pass, ae, d, batch, {}).states.value();
}

Matrix logits_of(Autoencoder& ae, Domain d, const Matrix& h, const TokenBatch& target) {
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  return decode_logits(pass, ae, d, tape.constant(h), target, {}).value();
}

}  // namespace

TEST_SUITE("guru") {

TEST_CASE("embedding adds item and positional rows") {
  Rng rng(1);
  EmbeddingTables t("t", 10, 7, 4);
  t.init(rng);
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  const std::vector<int> tokens = {0, 0, 5, 2, 5, 2, 11};
  const Matrix e = t.embed(pass, tokens, 7, false).value();
  CHECK(e.rows() == 7);
  for (int i = 0; i < 7; ++i)
    CHECK(e.row(i) == t.item_table.value.row(tokens[static_cast<std::size_t>(i)]) +
                          t.positional.value.row(i));
  // Identical tokens differ by the positional difference.
  CHECK((e.row(2) - e.row(4) - (t.positional.value.row(2) - t.positional.value.row(4))).norm() <
        1e-15);

  t.item_table.value.setZero();
  const Matrix p = t.embed(pass, tokens, 7, false).value();
  CHECK(p == t.positional.value);
  CHECK_THROWS_AS(t.embed(pass, {12, 0, 0, 0, 0, 0, 0}, 7, false), InvariantError);

  EmbeddingTables big("big", 50, 101, 64);
  big.init(rng);
  CHECK(big.embed(pass, std::vector<int>(101, 1), 101, false).value().rows() == 101);
  CHECK(big.embed(pass, std::vector<int>(101, 1), 101, false).value().cols() == 64);
}

TEST_CASE("decoder inputs shift the target right behind a begin token") {
  TokenBatch t;
  t.batch = 2;
  t.len = 4;
  t.tokens = {0, 3, 7, 11, 2, 4, 6, 11};
  t.mask = {0, 1, 1, 1, 1, 1, 1, 1};
  CHECK(decoder_inputs(t, 11) == std::vector<int>{0, 11, 3, 7, 11, 2, 4, 6});
}

TEST_CASE("encoder is deterministic and ignores pad embeddings") {
  auto ae = testing::tiny_autoencoder(3);
  const auto batch = pad_batch({{4}, {1, 2, 3}}, 6, 10);
  const Matrix s1 = encode_states(*ae, Domain::A, batch);
  CHECK(encode_states(*ae, Domain::A, batch) == s1);

  ae->tables(Domain::A).item_table.value.row(0).setConstant(3.7);
  const Matrix s2 = encode_states(*ae, Domain::A, batch);
  for (int r = 0; r < static_cast<int>(batch.tokens.size()); ++r)
    if (batch.mask[static_cast<std::size_t>(r)]) CHECK(s2.row(r) == s1.row(r));

  TokenBatch empty = batch;
  empty.tokens = {0, 0, 0, 0, 0, 0, 11, 0, 0, 0, 1, 2, 3, 11};
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  CHECK_THROWS_AS(encode(pass, *ae, Domain::A, empty, {}), InvariantError);
}

TEST_CASE("decoder logits are causal") {
  auto ae = testing::tiny_autoencoder(5);
  Rng rng(9);
  const Matrix h = testing::random_matrix(1, 8, rng);
  const auto base = pad_batch({{1, 2, 3, 4, 5, 6}}, 6, 10);
  const Matrix l0 = logits_of(*ae, Domain::A, h, base);
  for (int t = 0; t < 6; ++t) {
    auto changed = base;
    changed.tokens[static_cast<std::size_t>(t)] = 9;
    const Matrix l1 = logits_of(*ae, Domain::A, h, changed);
    for (int s = 0; s <= t; ++s) CHECK(l1.row(s) == l0.row(s));
    CHECK((l1.row(t + 1) - l0.row(t + 1)).norm() > 0.0);
  }
  // The first position sees only the begin token and h.
  const Matrix h2 = h * 2.0;
  CHECK((logits_of(*ae, Domain::A, h2, base).row(0) - l0.row(0)).norm() > 0.0);
  CHECK(logits_of(*ae, Domain::A, h, base) == l0);
}

TEST_CASE("uniform logits give ln 21 with 20 sampled negatives") {
  Rng rng(2);
  const auto cand = reconstruction_candidates({3, 7, 1}, 50, 20, rng);
  CHECK(cand.cols() == 21);
  for (int r = 0; r < 3; ++r) {
    std::set<int> uniq(cand.row(r).data(), cand.row(r).data() + 21);
    CHECK(uniq.size() == 21);
    CHECK(uniq.count(0) == 0);
  }
  nn::Tape tape;
  Var hidden = tape.constant(Matrix::Zero(3, 4));
  Var table = tape.constant(testing::random_matrix(52, 4, rng));
  CHECK(nn::candidate_softmax_xent(hidden, table, cand).scalar() ==
        doctest::Approx(std::log(21.0)).epsilon(1e-12));

  // A target that dominates its candidates costs nothing.
  Matrix tbl = Matrix::Zero(52, 4);
  tbl(3, 0) = 1.0;
  Matrix hid = Matrix::Zero(1, 4);
  hid(0, 0) = 1e3;
  nn::Tape t2;
  const auto c1 = reconstruction_candidates({3}, 50, 20, rng);
  CHECK(nn::candidate_softmax_xent(t2.constant(hid), t2.constant(tbl), c1).scalar() < 1e-12);
}

TEST_CASE("sampled softmax equals full softmax when every item is a candidate") {
  auto ae = std::make_unique<Autoencoder>(testing::tiny_dims(), 12, 12);
  Rng init(4);
  ae->init(init);
  const auto batch = pad_batch(testing::tiny_sequences(4, 12, 8), 6, 12);
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  const auto enc = encode(pass, *ae, Domain::A, batch, {});
  Rng rng(1);
  const double sampled = reconstruction_loss(pass, *ae, Domain::A, enc.h, batch, 11, rng, {}).scalar();

  // Oracle: log-softmax over all 12 item rows of the logits.
  const Matrix logits = decode_logits(pass, *ae, Domain::A, enc.h, batch, {}).value();
  double total = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < batch.tokens.size(); ++i) {
    const int t = batch.tokens[i];
    if (t < 1 || t > 12) continue;
    const auto row = logits.row(static_cast<Eigen::Index>(i)).segment(1, 12);
    const double mx = row.maxCoeff();
    total += mx + std::log((row.array() - mx).exp().sum()) - logits(static_cast<Eigen::Index>(i), t);
    ++n;
  }
  CHECK(std::abs(sampled - total / n) < 1e-6);
}

TEST_CASE("reconstruction gradient matches finite differences") {
  CHECK(testing::reconstruction_grad_error(1) < 1e-4);
  CHECK(testing::reconstruction_grad_error(2, 20) < 1e-4);
}

TEST_CASE("reconstruction needs items in the target") {
  auto ae = testing::tiny_autoencoder(3);
  TokenBatch t;
  t.batch = 1;
  t.len = 7;
  t.tokens = {0, 0, 0, 0, 0, 0, 11};
  t.mask = {0, 0, 0, 0, 0, 0, 1};
  nn::Tape tape;
  Pass pass{&tape, 0.0, nullptr};
  Rng rng(1);
  CHECK_THROWS_AS(
      reconstruction_loss(pass, *ae, Domain::A, tape.constant(Matrix::Zero(1, 8)), t, 4, rng, {}),
      InvariantError);
}

TEST_CASE("one encoder parameter set serves both domains") {
  auto ae = testing::tiny_autoencoder(6);
  const auto batch = pad_batch({{1, 2, 3}}, 6, 10);
  nn::ParameterList all = ae->parameters();
  int encoder_params = 0;
  for (auto* p : all) encoder_params += p->name.rfind("encoder.", 0) == 0;
  CHECK(encoder_params == static_cast<int>(ae->encoder_parameters().size()));

  // Gradients from both domains accumulate in the same encoder storage.
  Rng rng(2);
  const Matrix weights = testing::random_matrix(1, 8, rng);
  auto encoder_grad = [&](bool a, bool b) {
    nn::zero_grads(all);
    nn::Tape tape;
    Pass pass{&tape, 0.0, nullptr};
    Var loss = tape.constant(Matrix::Zero(1, 1));
    if (a) loss = nn::add(loss, nn::sum(nn::mul_const(encode(pass, *ae, Domain::A, batch, {}).h, weights)));
    if (b) loss = nn::add(loss, nn::sum(nn::mul_const(encode(pass, *ae, Domain::B, batch, {}).h, weights)));
    tape.backward(loss);
    return Matrix(ae->encoder().blocks[0].self_attn.wq.grad);
  };
  const Matrix ga = encoder_grad(true, false);
  const Matrix gb = encoder_grad(false, true);
  CHECK(ga.norm() > 0.0);
  CHECK(gb.norm() > 0.0);
  CHECK((encoder_grad(true, true) - ga - gb).norm() < 1e-12);
}

TEST_CASE("extract_gur is pure and has d dimensions") {
  auto ae = testing::tiny_autoencoder(7);
  const auto seqs = testing::tiny_sequences(5, 10, 3);
  const Matrix g1 = extract_gur(*ae, Domain::B, seqs, 2);
  CHECK(g1.rows() == 5);
  CHECK(g1.cols() == 8);
  CHECK(extract_gur(*ae, Domain::B, seqs, 2) == g1);
  // Chunking changes only the GEMM blocking.
  CHECK((extract_gur(*ae, Domain::B, seqs) - g1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g1.allFinite());
}

}  // TEST_SUITE
