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

#include <json.hpp>
#include <set>
#include <string>
#include <vector>

namespace guru {

/// Strict reader over one JSON object. Every getter records the key it
/// consumed; finish() rejects the rest. Errors are ConfigErrors naming the
/// dotted field path.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& j, std::string path);

  bool has(const std::string& key) const;

  /// Leaves `out` untouched when the key is absent.
  void get(const std::string& key, int& out);
  void get(const std::string& key, std::int64_t& out);
  void get(const std::string& key, std::uint64_t& out);
  void get(const std::string& key, double& out);
  void get(const std::string& key, bool& out);
  void get(const std::string& key, std::string& out);
  void get(const std::string& key, std::vector<int>& out);
  void get(const std::string& key, std::vector<std::string>& out);

  /// Reader over a nested object; an absent key yields an empty object.
  JsonReader child(const std::string& key);

  std::string field(const std::string& key) const;

  /// Throws on keys no getter asked for.
  void finish() const;

 private:
  const nlohmann::json& at(const std::string& key);

  nlohmann::json j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace guru
