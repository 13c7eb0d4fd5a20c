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
#include <string>
#include <vector>

#include "guru/corpus/types.hpp"

namespace guru::corpus {

/// Knobs of the planted cross-domain generator.
///
/// Every person carries a latent interest vector over `latent_dim`
/// clusters; each domain has its own items, split evenly across the same
/// clusters. A person's behavior in either domain is drawn from the
/// softmax of item affinities (cluster interest plus item popularity), so
/// an overlapped person's two sequences share one cause.
struct SyntheticParams {
  int users_per_domain = 500;
  int items_per_domain = 300;
  int overlap_count = 200;
  int latent_dim = 8;
  double mean_len_a = 30.0;
  double mean_len_b = 30.0;
  /// Zipf exponent of item popularity inside a cluster; 0 = uniform.
  double sparsity_skew = 0.0;
  /// Interest mass on the primary and secondary cluster; the rest is
  /// spread evenly.
  double primary_share = 0.6;
  double secondary_share = 0.25;
  int k_core = 5;
};

struct SyntheticDataset {
  CrossDomainDataset data;
  /// Planted truth. Rows of person_latent follow person_ids; rows of the
  /// item matrices follow item index - 1. Affinity of an item is
  /// person_latent.row(p) · item_vectors.row(i) + item_log_popularity(i).
  std::vector<std::string> person_ids;
  Eigen::MatrixXd person_latent;
  Eigen::MatrixXd item_vectors_a;
  Eigen::MatrixXd item_vectors_b;
  Eigen::VectorXd item_log_popularity_a;
  Eigen::VectorXd item_log_popularity_b;
};

/// Deterministic given (params, seed). Throws ConfigError when the
/// parameters cannot produce valid corpora (e.g. mean length below k_core).
SyntheticDataset generate_synthetic(const SyntheticParams& params, std::uint64_t seed);

}  // namespace guru::corpus
