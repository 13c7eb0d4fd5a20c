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

#include <optional>
#include <vector>

#include "guru/corpus/types.hpp"

namespace guru::corpus {

/// Leave-one-out split of one user's sequence.
struct UserSplit {
  std::vector<int> train;
  std::optional<int> valid;
  std::optional<int> test;
  /// Sequence shorter than three items: train-only, excluded from evaluation.
  bool flagged = false;

  bool evaluable() const { return test.has_value(); }
};

struct EvalSplit {
  std::vector<UserSplit> users;

  int num_evaluable() const;
  int num_flagged() const;
};

EvalSplit split_leave_one_out(const DomainCorpus& corpus);

/// Items preceding the held-out target: training prefix for validation,
/// training prefix plus the validation item for test.
enum class SplitPart { valid, test };
std::vector<int> history_before(const UserSplit& split, SplitPart part);
int target_of(const UserSplit& split, SplitPart part);

/// Fixed-length encoder input: left [pad]s, then the most recent items,
/// then [eos] in the last slot.
struct PaddedSequence {
  std::vector<int> tokens;  // length N + 1
  std::vector<std::uint8_t> mask;  // 1 where token != [pad]

  int length() const { return static_cast<int>(tokens.size()); }
  int content_length() const;
};

/// Throws InvariantError if N < 1 or an item is outside 1..num_items.
PaddedSequence pad_or_truncate(const std::vector<int>& seq, int max_len, int num_items);

/// Recovers the items of a padded sequence (drops [pad] and [eos]).
std::vector<int> strip_padding(const PaddedSequence& padded, int num_items);

}  // namespace guru::corpus
