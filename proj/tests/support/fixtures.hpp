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

#pragma once

// Small model instances and gradient checks shared by the unit tests and
// the acceptance runner.

#include <memory>
#include <vector>

#include "gradcheck.hpp"
#include "guru/adversary/critic.hpp"
#include "guru/cdsrec/recommender.hpp"
#include "guru/model/autoencoder.hpp"

namespace guru::testing {

inline model::ModelDims tiny_dims(int d = 8, int max_len = 6) {
  model::ModelDims dims;
  dims.max_len = max_len;
  dims.d = d;
  dims.layers = 1;
  dims.heads = 2;
  dims.d_ff = 16;
  dims.dropout = 0.0;
  return dims;
}

inline std::unique_ptr<model::Autoencoder> tiny_autoencoder(std::uint64_t seed, int items = 10) {
  auto ae = std::make_unique<model::Autoencoder>(tiny_dims(), items, items);
  Rng rng(seed);
  ae->init(rng);
  return ae;
}

inline std::vector<std::vector<int>> tiny_sequences(int count, int items, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < count; ++i) {
    std::vector<int> s(2 + rng.below(7));
    for (auto& v : s) v = static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(items)));
    out.push_back(s);
  }
  return out;
}

template <typename LossFn>
double grad_error(const nn::ParameterList& params, LossFn build) {
  nn::zero_grads(params);
  {
    nn::Tape tape;
    tape.backward(build(tape));
  }
  auto eval = [&] {
    nn::Tape tape;
    return build(tape).scalar();
  };
  return central_difference_check(params, eval).max_rel_error;
}

/// Reconstruction loss on a d=8, N=6, |V|=10 instance, all parameters.
inline double reconstruction_grad_error(std::uint64_t seed = 1, int n_sampled = 4) {
  auto ae = tiny_autoencoder(seed);
  const auto batch = model::pad_batch(tiny_sequences(3, 10, seed + 1), 6, 10);
  return grad_error(ae->parameters(), [&](nn::Tape& tape) {
    model::Pass pass{&tape, 0.0, nullptr};
    Rng rng(seed + 2);
    const auto enc = model::encode(pass, *ae, corpus::Domain::A, batch, {});
    return model::reconstruction_loss(pass, *ae, corpus::Domain::A, enc.h, batch, n_sampled, rng, {});
  });
}

inline nn::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

/// Critic loss on d=8 batches, critic parameters only.
inline double critic_grad_error(adversary::AdversaryMode mode, std::uint64_t seed = 1) {
  Rng rng(seed);
  adversary::Critic critic(8, 16);
  critic.init(rng);
  const nn::Matrix a = random_matrix(5, 8, rng);
  const nn::Matrix b = random_matrix(5, 8, rng, 0.5);
  adversary::AdversaryConfig cfg;
  cfg.mode = mode;
  return grad_error(critic.parameters(), [&](nn::Tape& tape) {
    model::Pass pass{&tape, 0.0, nullptr};
    Rng eps(seed + 7);
    return adversary::critic_loss(pass, critic, tape.constant(a), tape.constant(b), cfg, eps);
  });
}

/// Generator adversarial loss through the shared encoder and both tables.
inline double generator_grad_error(adversary::AdversaryMode mode, std::uint64_t seed = 1) {
  auto ae = tiny_autoencoder(seed);
  Rng rng(seed + 3);
  adversary::Critic critic(8, 16);
  critic.init(rng);
  const auto ba = model::pad_batch(tiny_sequences(4, 10, seed + 4), 6, 10);
  const auto bb = model::pad_batch(tiny_sequences(4, 10, seed + 5), 6, 10);
  nn::ParameterList params = ae->encoder_parameters();
  for (auto* p : ae->table_parameters(corpus::Domain::A)) params.push_back(p);
  for (auto* p : ae->table_parameters(corpus::Domain::B)) params.push_back(p);
  const double err = grad_error(params, [&](nn::Tape& tape) {
    model::Pass pass{&tape, 0.0, nullptr};
    const auto ha = model::encode(pass, *ae, corpus::Domain::A, ba, {}).h;
    const auto hb = model::encode(pass, *ae, corpus::Domain::B, bb, {}).h;
    return adversary::generator_adv_loss(pass, critic, ha, hb, mode);
  });
  for (auto* p : critic.parameters())
    if (p->grad.cwiseAbs().maxCoeff() != 0.0) return 1.0;  // critic must stay untouched
  return err;
}

/// l2 overlap loss through the shared encoder.
inline double l2_grad_error(std::uint64_t seed = 1) {
  auto ae = tiny_autoencoder(seed);
  const auto ba = model::pad_batch(tiny_sequences(4, 10, seed + 4), 6, 10);
  const auto bb = model::pad_batch(tiny_sequences(4, 10, seed + 5), 6, 10);
  return grad_error(ae->parameters(), [&](nn::Tape& tape) {
    model::Pass pass{&tape, 0.0, nullptr};
    const auto ha = model::encode(pass, *ae, corpus::Domain::A, ba, {}).h;
    const auto hb = model::encode(pass, *ae, corpus::Domain::B, bb, {}).h;
    return adversary::l2_overlap_loss(tape, ha, hb);
  });
}

/// BPR loss w.r.t. q, the item table, and the recommender stack.
inline double bpr_grad_error(std::uint64_t seed = 1) {
  Rng rng(seed);
  const auto dims = tiny_dims();
  model::EmbeddingTables tables("t", 10, dims.max_len + 1, dims.d);
  tables.init(rng);
  nn::Parameter q("q", 3, dims.d);
  nn::init_normal(q, 1.0, rng);
  const std::vector<int> pos = {1, 4, 9};
  const std::vector<std::vector<int>> neg = {{2, 3, 5}, {1, 2, 3}, {4, 5, 6}};
  const double direct = grad_error({&q, &tables.item_table}, [&](nn::Tape& tape) {
    return cdsrec::bpr_loss(tape.param(q), tape.param(tables.item_table), pos, neg);
  });

  cdsrec::Recommender rec("rec", dims, 4);
  rec.init(rng);
  const auto windows = cdsrec::window_batch({{1, 2}, {3, 4, 5, 6, 7}, {8}}, 4, 10);
  const nn::Matrix gur = random_matrix(3, dims.d, rng);
  nn::ParameterList params = rec.parameters();
  params.push_back(&tables.item_table);
  params.push_back(&tables.positional);
  const double stacked = grad_error(params, [&](nn::Tape& tape) {
    model::Pass pass{&tape, 0.0, nullptr};
    nn::Var qv = cdsrec::preference_vectors(pass, rec, tables, windows, tape.constant(gur), true, true);
    return cdsrec::bpr_loss(qv, tape.param(tables.item_table), pos, neg);
  });
  return std::max(direct, stacked);
}

}  // namespace guru::testing
