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

#include "guru/corpus/overlap.hpp"

#include <unordered_map>

#include "guru/util/error.hpp"
#include "guru/util/rng.hpp"

namespace guru::corpus {
namespace {

// Keeps the listed users and recodes the surviving items densely, in
// their previous relative order.
DomainCorpus restrict_users(const DomainCorpus& c, const std::vector<char>& keep) {
  DomainCorpus out;
  out.domain = c.domain;
  std::vector<int> used(static_cast<std::size_t>(c.num_items) + 1, 0);
  for (std::size_t u = 0; u < c.sequences.size(); ++u)
    if (keep[u])
      for (int it : c.sequences[u]) used[static_cast<std::size_t>(it)] = 1;
  std::vector<int> recode(used.size(), 0);
  for (int it = 1; it <= c.num_items; ++it) {
    if (!used[static_cast<std::size_t>(it)]) continue;
    out.item_ids.push_back(c.item_ids[static_cast<std::size_t>(it - 1)]);
    recode[static_cast<std::size_t>(it)] = static_cast<int>(out.item_ids.size());
  }
  out.num_items = static_cast<int>(out.item_ids.size());
  for (std::size_t u = 0; u < c.sequences.size(); ++u) {
    if (!keep[u]) continue;
    std::vector<int> seq;
    seq.reserve(c.sequences[u].size());
    for (int it : c.sequences[u]) seq.push_back(recode[static_cast<std::size_t>(it)]);
    out.user_ids.push_back(c.user_ids[u]);
    out.sequences.push_back(std::move(seq));
  }
  out.recompute_frequency();
  return out;
}

}  // namespace

CrossDomainDataset link_domains(DomainCorpus a, DomainCorpus b) {
  CrossDomainDataset ds;
  std::unordered_map<std::string, int> b_index;
  for (int u = 0; u < b.num_users(); ++u) b_index.emplace(b.user_ids[static_cast<std::size_t>(u)], u);
  for (int u = 0; u < a.num_users(); ++u) {
    auto it = b_index.find(a.user_ids[static_cast<std::size_t>(u)]);
    if (it != b_index.end()) ds.overlap.emplace_back(u, it->second);
  }
  ds.a = std::move(a);
  ds.b = std::move(b);
  ds.a.domain = Domain::A;
  ds.b.domain = Domain::B;
  return ds;
}

CrossDomainDataset subsample_overlap(const CrossDomainDataset& dataset, double target_rate,
                                     std::uint64_t seed, SubsampleReport* report) {
  if (dataset.overlap.empty())
    throw InvariantError("subsample_overlap: dataset has no overlapped users");
  if (!(target_rate > 0.0 && target_rate <= 1.0))
    throw ConfigError("subsample_overlap: target rate must lie in (0, 1]");
  const double current = dataset.overlap_rate();
  // Tolerate rounding when the caller passes the current rate back in.
  if (target_rate > current * (1.0 + 1e-12))
    throw ConfigError("subsample_overlap: target rate " + std::to_string(target_rate) +
                      " exceeds current overlap rate " + std::to_string(current) +
                      "; overlap cannot be created");
  const double p = std::min(1.0, target_rate / current);

  Rng rng(seed);
  std::vector<char> keep_a(static_cast<std::size_t>(dataset.a.num_users()), 1);
  std::vector<char> keep_b(static_cast<std::size_t>(dataset.b.num_users()), 1);
  std::vector<char> still_overlapped(dataset.overlap.size(), 0);
  SubsampleReport rep;
  rep.keep_probability = p;
  for (std::size_t i = 0; i < dataset.overlap.size(); ++i) {
    const double u = rng.uniform();
    const bool to_a = rng.below(2) == 0;
    if (u < p) {
      still_overlapped[i] = 1;
      ++rep.kept;
    } else if (to_a) {
      keep_b[static_cast<std::size_t>(dataset.overlap[i].second)] = 0;
      ++rep.moved_to_a;
    } else {
      keep_a[static_cast<std::size_t>(dataset.overlap[i].first)] = 0;
      ++rep.moved_to_b;
    }
  }

  if (report) *report = rep;
  if (rep.kept == static_cast<int>(dataset.overlap.size())) return dataset;

  CrossDomainDataset out;
  out.a = restrict_users(dataset.a, keep_a);
  out.b = restrict_users(dataset.b, keep_b);
  auto new_index = [](const std::vector<char>& keep) {
    std::vector<int> idx(keep.size(), -1);
    int next = 0;
    for (std::size_t u = 0; u < keep.size(); ++u)
      if (keep[u]) idx[u] = next++;
    return idx;
  };
  const auto ia = new_index(keep_a);
  const auto ib = new_index(keep_b);
  for (std::size_t i = 0; i < dataset.overlap.size(); ++i)
    if (still_overlapped[i])
      out.overlap.emplace_back(ia[static_cast<std::size_t>(dataset.overlap[i].first)],
                               ib[static_cast<std::size_t>(dataset.overlap[i].second)]);
  return out;
}

}  // namespace guru::corpus
