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

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>

#include "guru/eval/metrics.hpp"

namespace guru::eval {

/// HR@k / NDCG@k per domain and model variant, with the provenance needed
/// to reproduce the numbers.
class MetricsReport {
 public:
  /// Stored verbatim under "meta" (seed, n_neg, split, hashes).
  explicit MetricsReport(nlohmann::json meta = nlohmann::json::object()) : meta_(std::move(meta)) {}

  void add(const std::string& domain, const std::string& variant, const DomainMetrics& metrics);
  const DomainMetrics& get(const std::string& domain, const std::string& variant) const;
  bool has(const std::string& domain, const std::string& variant) const;

  nlohmann::json meta() const { return meta_; }
  nlohmann::json& meta() { return meta_; }

  /// {"meta": ..., "results": {domain: {variant: {"users": n,
  ///  "hr@5": ..., "ndcg@5": ..., ...}}}}
  nlohmann::json to_json() const;

  /// Per-user ranks: domain,variant,user,target,rank (sorted by domain,
  /// variant, user).
  std::string ranks_csv() const;

  /// Writes report.json and ranks.csv into `dir`.
  void write(const std::filesystem::path& dir) const;

 private:
  nlohmann::json meta_;
  std::map<std::pair<std::string, std::string>, DomainMetrics> results_;
};

}  // namespace guru::eval
