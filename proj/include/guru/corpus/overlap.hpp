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

#include "guru/corpus/types.hpp"

namespace guru::corpus {

/// Pairs users of the two corpora that share a raw user id.
CrossDomainDataset link_domains(DomainCorpus a, DomainCorpus b);

struct SubsampleReport {
  double keep_probability = 1.0;
  int kept = 0;
  int moved_to_a = 0;  // former overlapped users now only in A
  int moved_to_b = 0;
};

/// Manufactures a lower overlap rate.
///
/// Overlap rate is overlapped persons / distinct persons; de-overlapping
/// keeps the person count fixed, so each overlapped user is kept with
/// probability target_rate / current_rate. A user that is not kept is
/// assigned to A or B uniformly and its sequence in the other domain is
/// deleted. Item sets are then re-derived (unused items dropped, the
/// rest recoded in their previous order), so |V| may shrink.
///
/// Throws InvariantError without overlap and ConfigError if target_rate is
/// outside (0, 1] or above the current rate.
CrossDomainDataset subsample_overlap(const CrossDomainDataset& dataset, double target_rate,
                                     std::uint64_t seed, SubsampleReport* report = nullptr);

}  // namespace guru::corpus
