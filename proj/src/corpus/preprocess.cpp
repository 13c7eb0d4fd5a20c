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

#include "guru/corpus/preprocess.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

#include "guru/util/error.hpp"

namespace guru::corpus {
namespace {

struct Event {
  std::int64_t timestamp;
  std::size_t order;
  int item;
};

class Interner {
 public:
  int id(const std::string& key) {
    auto [it, inserted] = index_.emplace(key, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(key);
    return it->second;
  }
  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
};

bool collapse_repeats(std::vector<int>& seq) {
  auto end = std::unique(seq.begin(), seq.end());
  if (end == seq.end()) return false;
  seq.erase(end, seq.end());
  return true;
}

}  // namespace

DomainCorpus preprocess(const std::vector<Interaction>& records, Domain domain,
                        const PreprocessOptions& options) {
  if (records.empty()) throw CorpusDegenerateError("input");
  if (options.k_core < 1) throw ConfigError("k_core must be >= 1");

  Interner users, items;
  std::vector<std::vector<Event>> events;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Interaction& r = records[i];
    if (r.rating && *r.rating < options.rating_min) continue;
    if (options.min_timestamp && r.timestamp < *options.min_timestamp) continue;
    const int u = users.id(r.user_id);
    if (u == static_cast<int>(events.size())) events.emplace_back();
    events[static_cast<std::size_t>(u)].push_back({r.timestamp, i, items.id(r.item_id)});
  }
  if (events.empty()) throw CorpusDegenerateError("rating_filter");

  std::vector<std::vector<int>> seqs(events.size());
  for (std::size_t u = 0; u < events.size(); ++u) {
    auto& ev = events[u];
    std::stable_sort(ev.begin(), ev.end(),
                     [](const Event& x, const Event& y) { return x.timestamp < y.timestamp; });
    seqs[u].reserve(ev.size());
    for (const Event& e : ev) seqs[u].push_back(e.item);
  }

  std::vector<char> user_alive(seqs.size(), 1);
  const auto k = static_cast<std::size_t>(options.k_core);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t u = 0; u < seqs.size(); ++u)
      if (user_alive[u]) changed |= collapse_repeats(seqs[u]);

    std::vector<std::size_t> item_count(static_cast<std::size_t>(items.size()), 0);
    for (std::size_t u = 0; u < seqs.size(); ++u)
      if (user_alive[u])
        for (int it : seqs[u]) ++item_count[static_cast<std::size_t>(it)];

    for (std::size_t u = 0; u < seqs.size(); ++u) {
      if (!user_alive[u]) continue;
      auto& s = seqs[u];
      const std::size_t before = s.size();
      s.erase(std::remove_if(s.begin(), s.end(),
                             [&](int it) { return item_count[static_cast<std::size_t>(it)] < k; }),
              s.end());
      changed |= s.size() != before;
      if (s.size() < k) {
        user_alive[u] = 0;
        changed = true;
      }
    }
  }

  std::vector<int> order;
  for (std::size_t u = 0; u < seqs.size(); ++u)
    if (user_alive[u]) order.push_back(static_cast<int>(u));
  if (order.empty()) throw CorpusDegenerateError("k_core");
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return users.name(x) < users.name(y); });

  DomainCorpus out;
  out.domain = domain;
  std::vector<int> recode(static_cast<std::size_t>(items.size()), 0);
  for (int u : order) {
    std::vector<int> seq;
    seq.reserve(seqs[static_cast<std::size_t>(u)].size());
    for (int it : seqs[static_cast<std::size_t>(u)]) {
      int& code = recode[static_cast<std::size_t>(it)];
      if (code == 0) {
        out.item_ids.push_back(items.name(it));
        code = static_cast<int>(out.item_ids.size());
      }
      seq.push_back(code);
    }
    out.user_ids.push_back(users.name(u));
    out.sequences.push_back(std::move(seq));
  }
  out.num_items = static_cast<int>(out.item_ids.size());
  out.recompute_frequency();
  return out;
}

std::vector<Interaction> to_interactions(const DomainCorpus& corpus) {
  std::vector<Interaction> out;
  out.reserve(corpus.num_interactions());
  for (std::size_t u = 0; u < corpus.sequences.size(); ++u) {
    const auto& s = corpus.sequences[u];
    for (std::size_t t = 0; t < s.size(); ++t)
      out.push_back({corpus.user_ids[u], corpus.item_ids[static_cast<std::size_t>(s[t] - 1)],
                     static_cast<std::int64_t>(t), std::nullopt});
  }
  return out;
}

}  // namespace guru::corpus
