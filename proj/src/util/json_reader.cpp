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

#include "guru/util/json_reader.hpp"

#include "guru/util/error.hpp"

namespace guru {

JsonReader::JsonReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (j_.is_null()) j_ = nlohmann::json::object();
  if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
}

bool JsonReader::has(const std::string& key) const { return j_.contains(key); }

std::string JsonReader::field(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

const nlohmann::json& JsonReader::at(const std::string& key) {
  seen_.insert(key);
  return j_.at(key);
}

void JsonReader::get(const std::string& key, int& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(field(key) + ": out of range");
  out = static_cast<int>(x);
}

void JsonReader::get(const std::string& key, std::int64_t& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
  out = v.get<std::int64_t>();
}

void JsonReader::get(const std::string& key, std::uint64_t& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(field(key) + ": expected a nonnegative integer");
  out = v.get<std::uint64_t>();
}

void JsonReader::get(const std::string& key, double& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
  out = v.get<double>();
}

void JsonReader::get(const std::string& key, bool& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
  out = v.get<bool>();
}

void JsonReader::get(const std::string& key, std::string& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
  out = v.get<std::string>();
}

void JsonReader::get(const std::string& key, std::vector<int>& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of integers");
  std::vector<int> r;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(field(key) + ": expected an array of integers");
    r.push_back(e.get<int>());
  }
  out = r;
}

void JsonReader::get(const std::string& key, std::vector<std::string>& out) {
  if (!has(key)) return;
  const auto& v = at(key);
  if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of strings");
  std::vector<std::string> r;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(field(key) + ": expected an array of strings");
    r.push_back(e.get<std::string>());
  }
  out = r;
}

JsonReader JsonReader::child(const std::string& key) {
  if (!has(key)) return JsonReader(nlohmann::json::object(), field(key));
  return JsonReader(at(key), field(key));
}

void JsonReader::finish() const {
  for (const auto& [key, value] : j_.items())
    if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
}

}  // namespace guru
