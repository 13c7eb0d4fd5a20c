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

#include "guru/corpus/types.hpp"

#include <numeric>
#include <set>

#include "guru/util/error.hpp"

namespace guru::corpus {

Domain parse_domain(const std::string& s) {
  if (s == "A" || s == "a") return Domain::A;
  if (s == "B" || s == "b") return Domain::B;
  throw ConfigError("unknown domain tag '" + s + "' (expected A or B)");
}

std::size_t training_length(std::size_t n) { return n >= 3 ? n - 2 : n; }

std::size_t DomainCorpus::num_interactions() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

double DomainCorpus::mean_length() const {
  return sequences.empty() ? 0.0
                           : static_cast<double>(num_interactions()) /
                                 static_cast<double>(sequences.size());
}

void DomainCorpus::recompute_frequency() {
  item_frequency.assign(static_cast<std::size_t>(num_items) + 1, 0);
  for (const auto& s : sequences) {
    const std::size_t n = training_length(s.size());
    for (std::size_t i = 0; i < n; ++i) ++item_frequency[static_cast<std::size_t>(s[i])];
  }
}

void DomainCorpus::validate(int k_core) const {
  const std::string tag = std::string("corpus ") + domain_name(domain) + ": ";
  if (num_items <= 0) throw InvariantError(tag + "no items");
  if (static_cast<int>(item_ids.size()) != num_items)
    throw InvariantError(tag + "item id table size != num_items");
  if (user_ids.size() != sequences.size())
    throw InvariantError(tag + "user id table size != number of sequences");
  if (item_frequency.size() != static_cast<std::size_t>(num_items) + 1)
    throw InvariantError(tag + "item_frequency has wrong size");
  std::int64_t training_total = 0;
  for (std::size_t u = 0; u < sequences.size(); ++u) {
    const auto& s = sequences[u];
    if (static_cast<int>(s.size()) < k_core)
      throw InvariantError(tag + "user " + user_ids[u] + " has " + std::to_string(s.size()) +
                           " items, fewer than k_core");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 1 || s[i] > num_items)
        throw InvariantError(tag + "item index " + std::to_string(s[i]) + " out of range");
      if (i > 0 && s[i] == s[i - 1])
        throw InvariantError(tag + "consecutive duplicate item in user " + user_ids[u]);
    }
    training_total += static_cast<std::int64_t>(training_length(s.size()));
  }
  const std::int64_t freq_total =
      std::accumulate(item_frequency.begin(), item_frequency.end(), std::int64_t{0});
  if (freq_total != training_total || item_frequency[0] != 0)
    throw InvariantError(tag + "item_frequency does not sum to training interactions");
}

double CrossDomainDataset::overlap_rate() const {
  const int persons = num_persons();
  return persons == 0 ? 0.0 : static_cast<double>(overlap.size()) / persons;
}

void CrossDomainDataset::validate(int k_core) const {
  a.validate(k_core);
  b.validate(k_core);
  std::set<int> seen_a, seen_b;
  for (const auto& [ua, ub] : overlap) {
    if (ua < 0 || ua >= a.num_users() || ub < 0 || ub >= b.num_users())
      throw InvariantError("overlap pair references an unknown user");
    if (!seen_a.insert(ua).second || !seen_b.insert(ub).second)
      throw InvariantError("user appears in more than one overlap pair");
  }
}

}  // namespace guru::corpus
