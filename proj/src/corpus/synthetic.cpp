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

#include "guru/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "guru/util/error.hpp"
#include "guru/util/rng.hpp"

namespace guru::corpus {
namespace {

int poisson(double lambda, Rng& rng) {
  // Counts unit-rate arrivals before time lambda; exact for any lambda.
  int k = 0;
  double t = -std::log(rng.uniform_open());
  while (t < lambda) {
    ++k;
    t += -std::log(rng.uniform_open());
  }
  return k;
}

// Cluster labels balanced within each role group, so each domain's
// population covers the clusters evenly.
std::vector<int> balanced_labels(const std::vector<int>& group_sizes, int classes, Rng& rng) {
  std::vector<int> labels;
  for (int n : group_sizes) {
    std::vector<int> group(static_cast<std::size_t>(n));
    const int offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    for (int i = 0; i < n; ++i) group[static_cast<std::size_t>(i)] = (i + offset) % classes;
    rng.shuffle(group);
    labels.insert(labels.end(), group.begin(), group.end());
  }
  return labels;
}

int draw_index(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

struct DomainItems {
  std::vector<std::vector<int>> by_cluster;          // item indices (1-based)
  std::vector<std::vector<double>> cumulative;       // popularity CDF per cluster
  Eigen::MatrixXd vectors;
  Eigen::VectorXd log_popularity;
};

DomainItems make_items(const SyntheticParams& p) {
  DomainItems d;
  const int k = p.latent_dim;
  d.by_cluster.resize(static_cast<std::size_t>(k));
  d.cumulative.resize(static_cast<std::size_t>(k));
  d.vectors = Eigen::MatrixXd::Zero(p.items_per_domain, k);
  d.log_popularity = Eigen::VectorXd::Zero(p.items_per_domain);
  for (int i = 1; i <= p.items_per_domain; ++i) {
    const int c = (i - 1) % k;
    auto& members = d.by_cluster[static_cast<std::size_t>(c)];
    members.push_back(i);
    const double rank = static_cast<double>(members.size());
    const double w = std::pow(rank, -p.sparsity_skew);
    auto& cum = d.cumulative[static_cast<std::size_t>(c)];
    cum.push_back((cum.empty() ? 0.0 : cum.back()) + w);
    d.vectors(i - 1, c) = 1.0;
  }
  for (int c = 0; c < k; ++c) {
    const auto& members = d.by_cluster[static_cast<std::size_t>(c)];
    const auto& cum = d.cumulative[static_cast<std::size_t>(c)];
    for (std::size_t r = 0; r < members.size(); ++r) {
      const double w = cum[r] - (r == 0 ? 0.0 : cum[r - 1]);
      d.log_popularity(members[r] - 1) = std::log(w / cum.back());
    }
  }
  return d;
}

std::vector<int> draw_sequence(const Eigen::RowVectorXd& interest_cdf, const DomainItems& items,
                               int length, Rng& rng) {
  std::vector<double> cdf(interest_cdf.data(), interest_cdf.data() + interest_cdf.size());
  std::vector<int> seq;
  seq.reserve(static_cast<std::size_t>(length));
  while (static_cast<int>(seq.size()) < length) {
    const int c = draw_index(cdf, rng);
    const int item = items.by_cluster[static_cast<std::size_t>(c)]
                                     [static_cast<std::size_t>(draw_index(
                                         items.cumulative[static_cast<std::size_t>(c)], rng))];
    if (!seq.empty() && seq.back() == item) continue;
    seq.push_back(item);
  }
  return seq;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticParams& p, std::uint64_t seed) {
  if (p.users_per_domain < 1) throw ConfigError("synthetic: users_per_domain must be >= 1");
  if (p.overlap_count < 0 || p.overlap_count > p.users_per_domain)
    throw ConfigError("synthetic: overlap_count must lie in [0, users_per_domain]");
  if (p.latent_dim < 1) throw ConfigError("synthetic: latent_dim must be >= 1");
  if (p.items_per_domain < 2 * p.latent_dim)
    throw ConfigError("synthetic: need at least two items per latent cluster");
  if (p.k_core < 1) throw ConfigError("synthetic: k_core must be >= 1");
  if (p.mean_len_a < p.k_core || p.mean_len_b < p.k_core)
    throw ConfigError("synthetic: mean sequence length below k_core would yield sequences "
                      "shorter than k_core");
  if (p.sparsity_skew < 0.0) throw ConfigError("synthetic: sparsity_skew must be >= 0");
  if (p.primary_share < 0 || p.secondary_share < 0 || p.primary_share + p.secondary_share >= 1.0)
    throw ConfigError("synthetic: interest shares must be nonnegative and sum below 1");

  Rng rng(seed);
  const int k = p.latent_dim;
  const int overlap = p.overlap_count;
  const int only = p.users_per_domain - overlap;
  const int persons = overlap + 2 * only;

  // Person roles: [0, overlap) both domains, then A-only, then B-only.
  // Raw ids are a random permutation so index order carries no role.
  std::vector<int> id_perm(static_cast<std::size_t>(persons));
  std::iota(id_perm.begin(), id_perm.end(), 0);
  rng.shuffle(id_perm);

  SyntheticDataset out;
  out.person_ids.resize(static_cast<std::size_t>(persons));
  for (int i = 0; i < persons; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "u%07d", id_perm[static_cast<std::size_t>(i)]);
    out.person_ids[static_cast<std::size_t>(i)] = buf;
  }

  const std::vector<int> groups = {overlap, only, only};
  const auto primary = balanced_labels(groups, k, rng);
  const auto secondary = balanced_labels(groups, k, rng);
  const double base = (1.0 - p.primary_share - p.secondary_share) / k;
  Eigen::MatrixXd interest = Eigen::MatrixXd::Constant(persons, k, base);
  for (int i = 0; i < persons; ++i) {
    interest(i, primary[static_cast<std::size_t>(i)]) += p.primary_share;
    interest(i, secondary[static_cast<std::size_t>(i)]) += p.secondary_share;
  }
  out.person_latent = interest.array().log().matrix();

  const DomainItems items_a = make_items(p);
  const DomainItems items_b = make_items(p);
  out.item_vectors_a = items_a.vectors;
  out.item_vectors_b = items_b.vectors;
  out.item_log_popularity_a = items_a.log_popularity;
  out.item_log_popularity_b = items_b.log_popularity;

  struct Row {
    std::string id;
    std::vector<int> seq;
  };
  std::vector<Row> rows_a, rows_b;
  for (int i = 0; i < persons; ++i) {
    const bool in_a = i < overlap || (i >= overlap && i < overlap + only);
    const bool in_b = i < overlap || i >= overlap + only;
    Eigen::RowVectorXd cdf(k);
    double acc = 0.0;
    for (int c = 0; c < k; ++c) cdf(c) = (acc += interest(i, c));
    if (in_a) {
      const int len = p.k_core + poisson(p.mean_len_a - p.k_core, rng);
      rows_a.push_back({out.person_ids[static_cast<std::size_t>(i)],
                        draw_sequence(cdf, items_a, len, rng)});
    }
    if (in_b) {
      const int len = p.k_core + poisson(p.mean_len_b - p.k_core, rng);
      rows_b.push_back({out.person_ids[static_cast<std::size_t>(i)],
                        draw_sequence(cdf, items_b, len, rng)});
    }
  }

  auto build = [&](std::vector<Row>& rows, Domain domain, const char* prefix) {
    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.id < y.id; });
    DomainCorpus c;
    c.domain = domain;
    c.num_items = p.items_per_domain;
    for (int i = 1; i <= p.items_per_domain; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%05d", prefix, i);
      c.item_ids.push_back(buf);
    }
    for (auto& r : rows) {
      c.user_ids.push_back(r.id);
      c.sequences.push_back(std::move(r.seq));
    }
    c.recompute_frequency();
    return c;
  };
  DomainCorpus a = build(rows_a, Domain::A, "a");
  DomainCorpus b = build(rows_b, Domain::B, "b");

  // Overlap pairs by shared raw id (both corpora are sorted by id).
  std::size_t j = 0;
  for (int ua = 0; ua < a.num_users(); ++ua) {
    while (j < b.user_ids.size() && b.user_ids[j] < a.user_ids[static_cast<std::size_t>(ua)]) ++j;
    if (j < b.user_ids.size() && b.user_ids[j] == a.user_ids[static_cast<std::size_t>(ua)])
      out.data.overlap.emplace_back(ua, static_cast<int>(j));
  }
  out.data.a = std::move(a);
  out.data.b = std::move(b);
  return out;
}

}  // namespace guru::corpus
