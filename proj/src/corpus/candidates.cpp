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

#include "guru/corpus/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "guru/util/error.hpp"
#include "guru/util/rng.hpp"

namespace guru::corpus {

std::vector<int> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                     int count, const std::vector<int>& exclude,
                                                     std::uint64_t seed) {
  std::vector<char> banned(weights.size(), 0);
  for (int e : exclude)
    if (e >= 0 && static_cast<std::size_t>(e) < weights.size()) banned[static_cast<std::size_t>(e)] = 1;

  Rng rng(seed);
  // log(u) / w is a monotone transform of the key u^(1/w); the largest keys
  // form a weighted sample and descending key order is the draw order.
  std::vector<std::pair<double, int>> weighted, flat;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double u = rng.uniform_open();
    if (banned[i]) continue;
    if (weights[i] > 0.0) {
      weighted.emplace_back(std::log(u) / weights[i], static_cast<int>(i));
    } else {
      flat.emplace_back(u, static_cast<int>(i));
    }
  }
  const auto by_key = [](const auto& x, const auto& y) {
    return x.first > y.first || (x.first == y.first && x.second < y.second);
  };
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(count), weighted.size());
  std::partial_sort(weighted.begin(), weighted.begin() + static_cast<std::ptrdiff_t>(take),
                    weighted.end(), by_key);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < take; ++i) out.push_back(weighted[i].second);
  if (out.size() < static_cast<std::size_t>(count)) {
    const auto rest = std::min(static_cast<std::size_t>(count) - out.size(), flat.size());
    std::partial_sort(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(rest), flat.end(),
                      by_key);
    for (std::size_t i = 0; i < rest; ++i) out.push_back(flat[i].second);
  }
  return out;
}

std::vector<int> sample_candidates(const DomainCorpus& corpus, int user, int ground_truth,
                                   int n_neg, std::uint64_t seed) {
  if (ground_truth < 1 || ground_truth > corpus.num_items)
    throw InvariantError("sample_candidates: ground truth " + std::to_string(ground_truth) +
                         " is not an item");
  if (n_neg < 0 || n_neg >= corpus.num_items)
    throw InvariantError("sample_candidates: n_neg (" + std::to_string(n_neg) +
                         ") must be below the item count (" + std::to_string(corpus.num_items) +
                         ")");
  std::vector<double> weights(corpus.item_frequency.begin(), corpus.item_frequency.end());
  const std::uint64_t stream = Rng::derive(seed, static_cast<std::uint64_t>(user)).next_u64();
  std::vector<int> out =
      weighted_sample_without_replacement(weights, n_neg, {kPadToken, ground_truth}, stream);
  out.push_back(ground_truth);
  return out;
}

}  // namespace guru::corpus
