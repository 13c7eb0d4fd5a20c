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

#include "guru/corpus/split.hpp"

#include <algorithm>
#include <string>

#include "guru/util/error.hpp"

namespace guru::corpus {

int EvalSplit::num_evaluable() const {
  return static_cast<int>(
      std::count_if(users.begin(), users.end(), [](const UserSplit& u) { return u.evaluable(); }));
}

int EvalSplit::num_flagged() const {
  return static_cast<int>(
      std::count_if(users.begin(), users.end(), [](const UserSplit& u) { return u.flagged; }));
}

EvalSplit split_leave_one_out(const DomainCorpus& corpus) {
  EvalSplit split;
  split.users.reserve(corpus.sequences.size());
  for (const auto& seq : corpus.sequences) {
    UserSplit us;
    if (seq.size() < 3) {
      us.train = seq;
      us.flagged = true;
    } else {
      us.train.assign(seq.begin(), seq.end() - 2);
      us.valid = seq[seq.size() - 2];
      us.test = seq.back();
    }
    split.users.push_back(std::move(us));
  }
  return split;
}

std::vector<int> history_before(const UserSplit& split, SplitPart part) {
  std::vector<int> h = split.train;
  if (part == SplitPart::test && split.valid) h.push_back(*split.valid);
  return h;
}

int target_of(const UserSplit& split, SplitPart part) {
  const auto& t = part == SplitPart::valid ? split.valid : split.test;
  if (!t) throw InvariantError("user has no held-out item");
  return *t;
}

int PaddedSequence::content_length() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

PaddedSequence pad_or_truncate(const std::vector<int>& seq, int max_len, int num_items) {
  if (max_len < 1) throw InvariantError("pad_or_truncate: N must be >= 1");
  for (int it : seq)
    if (it < 1 || it > num_items)
      throw InvariantError("pad_or_truncate: item index " + std::to_string(it) +
                           " outside 1.." + std::to_string(num_items));
  PaddedSequence out;
  out.tokens.assign(static_cast<std::size_t>(max_len) + 1, kPadToken);
  out.mask.assign(static_cast<std::size_t>(max_len) + 1, 0);
  const std::size_t keep = std::min(seq.size(), static_cast<std::size_t>(max_len));
  const std::size_t offset = static_cast<std::size_t>(max_len) - keep;
  for (std::size_t i = 0; i < keep; ++i) {
    out.tokens[offset + i] = seq[seq.size() - keep + i];
    out.mask[offset + i] = 1;
  }
  out.tokens.back() = num_items + 1;
  out.mask.back() = 1;
  return out;
}

std::vector<int> strip_padding(const PaddedSequence& padded, int num_items) {
  std::vector<int> out;
  for (int t : padded.tokens)
    if (t != kPadToken && t != num_items + 1) out.push_back(t);
  return out;
}

}  // namespace guru::corpus
