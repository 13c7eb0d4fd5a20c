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

#include "guru/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>

#include "guru/corpus/candidates.hpp"
#include "guru/util/error.hpp"
#include "guru/util/rng.hpp"

namespace guru::eval {

int rank_of_target(const std::vector<int>& candidates, const std::vector<double>& scores,
                   int target) {
  if (candidates.size() != scores.size())
    throw InvariantError("rank_of_target: one score per candidate required");
  const auto it = std::find(candidates.begin(), candidates.end(), target);
  if (it == candidates.end()) throw InvariantError("rank_of_target: target is not a candidate");
  const double s = scores[static_cast<std::size_t>(it - candidates.begin())];
  int rank = 1;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (candidates[c] == target) continue;
    if (scores[c] >= s) ++rank;
  }
  return rank;
}

double hr_at_k(int rank, int k) { return rank <= k ? 1.0 : 0.0; }

double ndcg_at_k(int rank, int k) {
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

std::vector<Query> build_queries(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split,
                                 const EvalOptions& options) {
  std::vector<Query> out;
  for (std::size_t u = 0; u < split.users.size(); ++u) {
    const auto& us = split.users[u];
    if (!us.evaluable()) continue;
    Query q;
    q.user = static_cast<int>(u);
    q.history = corpus::history_before(us, options.part);
    q.target = corpus::target_of(us, options.part);
    q.candidates = corpus::sample_candidates(corpus, q.user, q.target, options.n_neg, options.seed);
    out.push_back(std::move(q));
  }
  return out;
}

namespace {

void check_no_leakage(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split) {
  std::vector<std::int64_t> train(corpus.item_frequency.size(), 0);
  for (const auto& us : split.users)
    for (int v : us.train) ++train[static_cast<std::size_t>(v)];
  if (train != corpus.item_frequency)
    throw InvariantError("evaluate: candidate frequencies are not training-only counts");
}

}  // namespace

DomainMetrics evaluate(const Scorer& scorer, const corpus::DomainCorpus& corpus,
                       const corpus::EvalSplit& split, const EvalOptions& options) {
  check_no_leakage(corpus, split);
  const auto queries = build_queries(corpus, split, options);
  if (queries.empty()) throw InvariantError("evaluate: no evaluable users");
  DomainMetrics m;
  for (int k : options.ks) {
    m.hr[k] = 0.0;
    m.ndcg[k] = 0.0;
  }
  const std::size_t step = static_cast<std::size_t>(std::max(1, options.batch));
  for (std::size_t start = 0; start < queries.size(); start += step) {
    const std::size_t end = std::min(queries.size(), start + step);
    std::vector<Query> part(queries.begin() + static_cast<long>(start),
                            queries.begin() + static_cast<long>(end));
    const auto scores = scorer(part);
    if (scores.size() != part.size()) throw InvariantError("evaluate: scorer returned wrong count");
    for (std::size_t i = 0; i < part.size(); ++i) {
      const int rank = rank_of_target(part[i].candidates, scores[i], part[i].target);
      m.ranks.push_back({part[i].user, part[i].target, rank});
      for (int k : options.ks) {
        m.hr[k] += hr_at_k(rank, k);
        m.ndcg[k] += ndcg_at_k(rank, k);
      }
    }
  }
  m.users = static_cast<int>(queries.size());
  for (int k : options.ks) {
    m.hr[k] /= m.users;
    m.ndcg[k] /= m.users;
  }
  return m;
}

Scorer baseline_pop(const corpus::DomainCorpus& corpus) {
  auto freq = std::make_shared<std::vector<std::int64_t>>(corpus.item_frequency);
  const double span = static_cast<double>(corpus.num_items) + 1.0;
  return [freq, span](const std::vector<Query>& queries) {
    std::vector<std::vector<double>> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
      std::vector<double> s;
      s.reserve(q.candidates.size());
      for (int v : q.candidates)
        s.push_back(static_cast<double>((*freq)[static_cast<std::size_t>(v)]) +
                    0.5 * (1.0 - v / span));
      out.push_back(std::move(s));
    }
    return out;
  };
}

BprMf::BprMf(int num_users, int num_items, const BprMfOptions& options)
    : options_(options),
      users_(Eigen::MatrixXd::Zero(num_users, options.dims)),
      items_(Eigen::MatrixXd::Zero(num_items + 1, options.dims)) {
  if (options.dims < 1 || options.epochs < 0) throw ConfigError("bprmf: invalid options");
  if (options.init_std > 0.0) {
    Rng rng(options.seed);
    for (Eigen::Index i = 0; i < users_.size(); ++i) users_.data()[i] = options.init_std * rng.normal();
    for (Eigen::Index i = 0; i < items_.size(); ++i) items_.data()[i] = options.init_std * rng.normal();
  }
}

double BprMf::pair_loss(int u, int i, int j) const {
  const double x = users_.row(u).dot(items_.row(i) - items_.row(j));
  const double nll = x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
  return nll + 0.5 * options_.reg *
                   (users_.row(u).squaredNorm() + items_.row(i).squaredNorm() +
                    items_.row(j).squaredNorm());
}

void BprMf::pair_gradient(int u, int i, int j, Eigen::RowVectorXd& gp, Eigen::RowVectorXd& gi,
                          Eigen::RowVectorXd& gj) const {
  const double x = users_.row(u).dot(items_.row(i) - items_.row(j));
  const double coef = -1.0 / (1.0 + std::exp(x));  // d/dx of −ln σ(x)
  gp = coef * (items_.row(i) - items_.row(j)) + options_.reg * users_.row(u);
  gi = coef * users_.row(u) + options_.reg * items_.row(i);
  gj = -coef * users_.row(u) + options_.reg * items_.row(j);
}

void BprMf::train(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::set<int>> seen(split.users.size());
  for (std::size_t u = 0; u < split.users.size(); ++u)
    for (int v : split.users[u].train) {
      pairs.emplace_back(static_cast<int>(u), v);
      seen[u].insert(v);
    }
  Rng rng(Rng::derive(options_.seed, 1).next_u64());
  Eigen::RowVectorXd gp, gi, gj;
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    rng.shuffle(pairs);
    for (const auto& [u, i] : pairs) {
      if (static_cast<int>(seen[static_cast<std::size_t>(u)].size()) >= corpus.num_items) continue;
      int j;
      do {
        j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(corpus.num_items)));
      } while (seen[static_cast<std::size_t>(u)].count(j));
      pair_gradient(u, i, j, gp, gi, gj);
      users_.row(u) -= options_.lr * gp;
      items_.row(i) -= options_.lr * gi;
      items_.row(j) -= options_.lr * gj;
    }
    if (!users_.allFinite() || !items_.allFinite())
      throw NonFiniteError("bprmf: non-finite factors after epoch " + std::to_string(epoch));
  }
}

Scorer baseline_bprmf(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split,
                      const BprMfOptions& options) {
  auto model = std::make_shared<BprMf>(corpus.num_users(), corpus.num_items, options);
  model->train(corpus, split);
  return [model](const std::vector<Query>& queries) {
    std::vector<std::vector<double>> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
      std::vector<double> s;
      s.reserve(q.candidates.size());
      for (int v : q.candidates) s.push_back(model->score(q.user, v));
      out.push_back(std::move(s));
    }
    return out;
  };
}

}  // namespace guru::eval
