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

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "guru/corpus/split.hpp"
#include "guru/corpus/types.hpp"

namespace guru::eval {

/// 1 + #candidates scoring above the target + #other candidates tying it.
/// Throws InvariantError if the target is not a candidate.
int rank_of_target(const std::vector<int>& candidates, const std::vector<double>& scores, int target);

double hr_at_k(int rank, int k);
/// 1 / log2(rank + 1) within the top k, else 0.
double ndcg_at_k(int rank, int k);

/// One ranking query: score `candidates` for `user` given `history`.
struct Query {
  int user = 0;
  std::vector<int> history;
  std::vector<int> candidates;
  int target = 0;
};

/// Scores every query's candidates (result rows follow the queries).
using Scorer = std::function<std::vector<std::vector<double>>(const std::vector<Query>&)>;

struct EvalOptions {
  corpus::SplitPart part = corpus::SplitPart::test;
  int n_neg = 200;
  std::vector<int> ks = {5, 10, 20};
  std::uint64_t seed = 2022;
  int batch = 256;
};

struct UserRank {
  int user = 0;
  int target = 0;
  int rank = 0;
};

struct DomainMetrics {
  std::map<int, double> hr;
  std::map<int, double> ndcg;
  int users = 0;
  std::vector<UserRank> ranks;
};

/// Builds the evaluation queries (history and frequency-sampled candidates
/// per evaluable user); candidates depend only on (corpus, split, seed).
std::vector<Query> build_queries(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split,
                                 const EvalOptions& options);

/// Averages HR@k and NDCG@k over evaluable users. Throws InvariantError
/// when no user is evaluable or the corpus frequencies include held-out
/// items.
DomainMetrics evaluate(const Scorer& scorer, const corpus::DomainCorpus& corpus,
                       const corpus::EvalSplit& split, const EvalOptions& options);

/// Popularity baseline: training frequency, ties broken toward the lower
/// item index.
Scorer baseline_pop(const corpus::DomainCorpus& corpus);

struct BprMfOptions {
  int dims = 32;
  int epochs = 20;
  double lr = 0.05;
  double reg = 0.01;
  double init_std = 0.1;
  std::uint64_t seed = 1;
};

/// Matrix factorization trained with the classic pairwise BPR objective
/// on the training prefixes.
class BprMf {
 public:
  BprMf(int num_users, int num_items, const BprMfOptions& options);

  /// −ln σ(p_u·(q_i − q_j)) + reg/2 (|p_u|² + |q_i|² + |q_j|²).
  double pair_loss(int u, int i, int j) const;
  /// Gradients of pair_loss w.r.t. p_u, q_i, q_j.
  void pair_gradient(int u, int i, int j, Eigen::RowVectorXd& gp, Eigen::RowVectorXd& gi,
                     Eigen::RowVectorXd& gj) const;
  void train(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split);
  double score(int u, int i) const { return users_.row(u).dot(items_.row(i)); }

  Eigen::MatrixXd& users() { return users_; }
  Eigen::MatrixXd& items() { return items_; }

 private:
  BprMfOptions options_;
  Eigen::MatrixXd users_;
  Eigen::MatrixXd items_;  // row 0 unused
};

Scorer baseline_bprmf(const corpus::DomainCorpus& corpus, const corpus::EvalSplit& split,
                      const BprMfOptions& options);

}  // namespace guru::eval
