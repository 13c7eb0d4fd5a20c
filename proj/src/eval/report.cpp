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

#include "guru/eval/report.hpp"

#include <fstream>
#include <sstream>

#include "guru/util/error.hpp"

namespace guru::eval {

void MetricsReport::add(const std::string& domain, const std::string& variant,
                        const DomainMetrics& metrics) {
  results_[{domain, variant}] = metrics;
}

bool MetricsReport::has(const std::string& domain, const std::string& variant) const {
  return results_.count({domain, variant}) > 0;
}

const DomainMetrics& MetricsReport::get(const std::string& domain, const std::string& variant) const {
  const auto it = results_.find({domain, variant});
  if (it == results_.end()) throw LookupError("no metrics for " + domain + "/" + variant);
  return it->second;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json results = nlohmann::json::object();
  for (const auto& [key, m] : results_) {
    nlohmann::json entry;
    entry["users"] = m.users;
    for (const auto& [k, v] : m.hr) entry["hr@" + std::to_string(k)] = v;
    for (const auto& [k, v] : m.ndcg) entry["ndcg@" + std::to_string(k)] = v;
    results[key.first][key.second] = entry;
  }
  return {{"meta", meta_}, {"results", results}};
}

std::string MetricsReport::ranks_csv() const {
  std::ostringstream out;
  out << "domain,variant,user,target,rank\n";
  for (const auto& [key, m] : results_)
    for (const auto& r : m.ranks)
      out << key.first << ',' << key.second << ',' << r.user << ',' << r.target << ',' << r.rank
          << '\n';
  return out.str();
}

void MetricsReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream json(dir / "report.json", std::ios::binary);
  json << to_json().dump(2) << '\n';
  std::ofstream csv(dir / "ranks.csv", std::ios::binary);
  csv << ranks_csv();
  if (!json || !csv) throw InputError("cannot write report into " + dir.string());
}

}  // namespace guru::eval
