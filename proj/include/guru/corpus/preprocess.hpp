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
#include <optional>
#include <vector>

#include "guru/corpus/types.hpp"

namespace guru::corpus {

struct PreprocessOptions {
  int rating_min = 3;  // keep ratings >= rating_min; unrated records are kept
  int k_core = 5;
  std::optional<std::int64_t> min_timestamp;  // drop records strictly earlier
};

/// Turns raw records into a DomainCorpus:
///  1. rating (and optional date) filter;
///  2. per-user chronological order, ties kept in input order;
///  3. collapse consecutive repeats and k-core filter users and items,
///     alternating until neither changes anything;
///  4. users sorted by raw id; items recoded 1..|V| by first appearance in
///     that user order.
///
/// Throws CorpusDegenerateError naming the stage that emptied the corpus.
DomainCorpus preprocess(const std::vector<Interaction>& records, Domain domain,
                        const PreprocessOptions& options = {});

/// Re-emits a corpus as records (timestamps = position) so it can be fed
/// through preprocess again.
std::vector<Interaction> to_interactions(const DomainCorpus& corpus);

}  // namespace guru::corpus
