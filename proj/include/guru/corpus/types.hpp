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
#include <string>
#include <utility>
#include <vector>

namespace guru::corpus {

enum class Domain { A = 0, B = 1 };

inline const char* domain_name(Domain d) { return d == Domain::A ? "A" : "B"; }
inline Domain other(Domain d) { return d == Domain::A ? Domain::B : Domain::A; }
Domain parse_domain(const std::string& s);

/// One raw behavior record.
struct Interaction {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
  std::optional<int> rating;

  bool operator==(const Interaction&) const = default;
};

/// Item index 0 is reserved for [pad]; items are 1..num_items; the token
/// num_items + 1 is [eos].
inline constexpr int kPadToken = 0;

/// A preprocessed single-domain corpus. Immutable once built.
struct DomainCorpus {
  Domain domain = Domain::A;
  int num_items = 0;
  std::vector<std::string> user_ids;  // user index -> raw id
  std::vector<std::string> item_ids;  // item index - 1 -> raw id
  std::vector<std::vector<int>> sequences;
  /// Occurrences within each user's training prefix (all but the last two
  /// items); size num_items + 1, entry 0 unused.
  std::vector<std::int64_t> item_frequency;

  int num_users() const { return static_cast<int>(sequences.size()); }
  int eos_token() const { return num_items + 1; }
  std::size_t num_interactions() const;
  double mean_length() const;

  /// Recomputes item_frequency from the training prefixes.
  void recompute_frequency();

  /// Throws InvariantError naming the first violated invariant.
  void validate(int k_core) const;

  bool operator==(const DomainCorpus&) const = default;
};

/// Training prefix of a sequence under the leave-one-out protocol.
std::size_t training_length(std::size_t sequence_length);

struct CrossDomainDataset {
  DomainCorpus a;
  DomainCorpus b;
  /// (user index in A, user index in B) for each overlapped person.
  std::vector<std::pair<int, int>> overlap;

  const DomainCorpus& corpus(Domain d) const { return d == Domain::A ? a : b; }
  DomainCorpus& corpus(Domain d) { return d == Domain::A ? a : b; }

  /// Distinct persons across both domains.
  int num_persons() const { return a.num_users() + b.num_users() - static_cast<int>(overlap.size()); }
  /// Fraction of persons that are overlapped.
  double overlap_rate() const;

  void validate(int k_core) const;

  bool operator==(const CrossDomainDataset&) const = default;
};

}  // namespace guru::corpus
