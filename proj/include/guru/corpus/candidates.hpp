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

#include <cstdint>
#include <vector>

#include "guru/corpus/types.hpp"

namespace guru::corpus {

/// Evaluation candidates: `n_neg` distinct negatives drawn without
/// replacement with probability proportional to training frequency (the
/// ground truth excluded), in draw order, followed by the ground truth.
///
/// When fewer than n_neg items have non-zero frequency the remainder is
/// drawn uniformly from the zero-frequency items, after all weighted draws.
/// The stream depends on (seed, user) only.
///
/// Throws InvariantError if ground_truth is not an item or n_neg >= |V|.
std::vector<int> sample_candidates(const DomainCorpus& corpus, int user, int ground_truth,
                                   int n_neg, std::uint64_t seed);

/// Weighted sampling without replacement over indices of `weights`
/// (Efraimidis–Spirakis keys). Zero-weight entries are only used, in
/// uniform random order, once the positive-weight ones run out; entries
/// listed in `exclude` are never returned.
std::vector<int> weighted_sample_without_replacement(const std::vector<double>& weights,
                                                     int count, const std::vector<int>& exclude,
                                                     std::uint64_t seed);

}  // namespace guru::corpus
