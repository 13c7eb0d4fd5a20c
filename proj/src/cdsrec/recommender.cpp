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

#include "guru/cdsrec/recommender.hpp"

#include <algorithm>

#include "guru/util/error.hpp"

namespace guru::cdsrec {

Recommender::Recommender(const std::string& prefix, const model::ModelDims& dims, int window)
    : window_(window),
      stack_(prefix, dims.layers, dims.d, dims.heads, dims.d_ff, true) {
  if (window < 1) throw ConfigError("cdsrec: window m must be >= 1");
  if (window > dims.max_len + 1)
    throw ConfigError("cdsrec: window m must not exceed the positional table (N + 1)");
}

void Recommender::init(Rng& rng) { stack_.init(rng); }

ParameterList Recommender::parameters() {
  ParameterList out;
  stack_.collect(out);
  return out;
}

TokenBatch window_batch(const std::vector<std::vector<int>>& histories, int window, int num_items) {
  TokenBatch b;
  b.batch = static_cast<int>(histories.size());
  b.len = window;
  b.tokens.assign(histories.size() * static_cast<std::size_t>(window), corpus::kPadToken);
  b.mask.assign(b.tokens.size(), 0);
  for (std::size_t u = 0; u < histories.size(); ++u) {
    const auto& h = histories[u];
    if (h.empty()) throw InvariantError("cdsrec: empty short-term window");
    const std::size_t keep = std::min(h.size(), static_cast<std::size_t>(window));
    const std::size_t base = u * static_cast<std::size_t>(window) + (window - keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const int v = h[h.size() - keep + i];
      if (v < 1 || v > num_items)
        throw LookupError("cdsrec: item " + std::to_string(v) + " is not in the vocabulary");
      b.tokens[base + i] = v;
      b.mask[base + i] = 1;
    }
  }
  return b;
}

Var preference_vectors(const Pass& pass, Recommender& rec, EmbeddingTables& tables,
                       const TokenBatch& windows, Var gur, bool train_rec, bool train_tables) {
  Var x = pass.drop(tables.embed(pass, windows.tokens, windows.len, train_tables));
  Var states = rec.stack().forward(pass, x, windows.shape(true), gur, train_rec);
  std::vector<int> last(static_cast<std::size_t>(windows.batch));
  for (int b = 0; b < windows.batch; ++b) last[static_cast<std::size_t>(b)] = (b + 1) * windows.len - 1;
  return nn::gather_rows(states, last);
}

std::vector<double> score(const Eigen::RowVectorXd& q, const std::vector<int>& candidates,
                          const EmbeddingTables& tables) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (int v : candidates) {
    if (v < 1 || v > tables.num_items)
      throw InvariantError("score: candidate " + std::to_string(v) + " is not an item");
    out.push_back(q.dot(tables.item_table.value.row(v)));
  }
  return out;
}

Var bpr_loss(Var q, Var item_table, const std::vector<int>& positives,
             const std::vector<std::vector<int>>& negatives) {
  const auto rows = static_cast<std::size_t>(q.rows());
  if (positives.size() != rows || negatives.size() != rows)
    throw InvariantError("bpr_loss: one positive and one negative list per row required");
  std::vector<int> neg_index;
  std::size_t per_row = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (negatives[r].empty()) throw InvariantError("bpr_loss: empty negative list");
    if (r == 0) per_row = negatives[r].size();
    if (negatives[r].size() != per_row)
      throw InvariantError("bpr_loss: negative lists must have equal sizes");
    if (std::find(negatives[r].begin(), negatives[r].end(), positives[r]) != negatives[r].end())
      throw InvariantError("bpr_loss: a negative equals the positive");
    neg_index.insert(neg_index.end(), negatives[r].begin(), negatives[r].end());
  }
  std::vector<int> q_repeat(neg_index.size());
  for (std::size_t i = 0; i < q_repeat.size(); ++i) q_repeat[i] = static_cast<int>(i / per_row);

  Var pos = nn::row_dot(q, nn::gather_rows(item_table, positives));
  Var neg = nn::row_dot(nn::gather_rows(q, q_repeat), nn::gather_rows(item_table, neg_index));
  Var neg_mean = nn::segment_mean_rows(neg, static_cast<int>(per_row));
  // −ln σ(s) = softplus(−s); −ln(1 − σ(s)) = softplus(s).
  return nn::mean(nn::add(nn::softplus(nn::scale(pos, -1.0)), nn::softplus(neg_mean)));
}

}  // namespace guru::cdsrec
