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

#include <string>
#include <vector>

#include "guru/model/autoencoder.hpp"

namespace guru::cdsrec {

using model::EmbeddingTables;
using model::Pass;
using model::TokenBatch;
using nn::Matrix;
using nn::ParameterList;
using nn::Var;

/// Next-item recommender of one domain: causal self-attention over the
/// short-term window, cross-attention to the user's GUR, feed-forward.
class Recommender {
 public:
  Recommender() = default;
  Recommender(const std::string& prefix, const model::ModelDims& dims, int window);

  int window() const { return window_; }
  void init(Rng& rng);
  ParameterList parameters();
  model::TransformerStack& stack() { return stack_; }

 private:
  int window_ = 20;
  model::TransformerStack stack_;
};

/// The last `window` items of each history, left-padded with [pad].
/// Throws InvariantError on an empty history or an unknown item.
TokenBatch window_batch(const std::vector<std::vector<int>>& histories, int window, int num_items);

/// Preference vectors q (batch × d): the final-position output of the
/// stack. `gur` holds one row per window; pass zeros for the SeqRec
/// ablation.
Var preference_vectors(const Pass& pass, Recommender& rec, EmbeddingTables& tables,
                       const TokenBatch& windows, Var gur, bool train_rec, bool train_tables);

/// r_v = q · I_v for each candidate.
std::vector<double> score(const Eigen::RowVectorXd& q, const std::vector<int>& candidates,
                          const EmbeddingTables& tables);

/// Mean over rows of −ln σ(q·I_pos) − ln(1 − σ(mean_{v'} q·I_{v'})), the
/// negatives averaged inside the sigmoid. Each row of `negatives` must be
/// nonempty and exclude the row's positive.
Var bpr_loss(Var q, Var item_table, const std::vector<int>& positives,
             const std::vector<std::vector<int>>& negatives);

}  // namespace guru::cdsrec
