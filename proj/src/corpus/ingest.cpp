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

#include "guru/corpus/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string_view>

#include "guru/util/error.hpp"

namespace guru::corpus {
namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool valid_rating(std::int64_t r) { return r >= 1 && r <= 5; }

std::optional<Interaction> parse_tsv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (fields.size() < 3 || fields.size() > 4) return std::nullopt;
  if (fields[0].empty() || fields[1].empty()) return std::nullopt;
  const auto ts = parse_int(fields[2]);
  if (!ts || *ts < 0) return std::nullopt;
  Interaction r{std::string(fields[0]), std::string(fields[1]), *ts, std::nullopt};
  if (fields.size() == 4) {
    const auto rating = parse_int(fields[3]);
    if (!rating || !valid_rating(*rating)) return std::nullopt;
    r.rating = static_cast<int>(*rating);
  }
  return r;
}

const nlohmann::json* field(const nlohmann::json& obj, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto it = obj.find(n);
    if (it != obj.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::optional<std::string> as_id(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>().empty() ? std::nullopt
                                                          : std::optional(v.get<std::string>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return std::nullopt;
}

std::optional<std::int64_t> as_integer(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::isfinite(d)) return static_cast<std::int64_t>(d);
    return std::nullopt;
  }
  if (v.is_string()) return parse_int(v.get<std::string>());
  return std::nullopt;
}

std::optional<Interaction> parse_jsonl(std::string_view line) {
  const auto obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
  const auto* user = field(obj, {"user", "reviewerID"});
  const auto* item = field(obj, {"item", "asin"});
  const auto* ts = field(obj, {"ts", "unixReviewTime"});
  if (!user || !item || !ts) return std::nullopt;
  auto uid = as_id(*user);
  auto iid = as_id(*item);
  auto t = as_integer(*ts);
  if (!uid || !iid || !t || *t < 0) return std::nullopt;
  Interaction r{*uid, *iid, *t, std::nullopt};
  if (const auto* rating = field(obj, {"rating", "overall"})) {
    auto rv = as_integer(*rating);
    if (!rv || !valid_rating(*rv)) return std::nullopt;
    r.rating = static_cast<int>(*rv);
  }
  return r;
}

}  // namespace

RecordFormat parse_record_format(const std::string& tag) {
  if (tag == "tsv") return RecordFormat::tsv;
  if (tag == "jsonl") return RecordFormat::jsonl;
  throw ConfigError("unknown record format '" + tag + "' (expected tsv or jsonl)");
}

IngestResult ingest(std::istream& in, RecordFormat format) {
  IngestResult result;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto rec = format == RecordFormat::tsv ? parse_tsv(view) : parse_jsonl(view);
    if (rec) {
      result.records.push_back(std::move(*rec));
    } else {
      ++result.skipped;
    }
  }
  if (in.bad()) throw InputError("read error while ingesting records");
  return result;
}

IngestResult ingest_file(const std::filesystem::path& path, RecordFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path.string());
  return ingest(in, format);
}

}  // namespace guru::corpus
