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

#include "guru/corpus/store.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "guru/corpus/split.hpp"
#include "guru/util/error.hpp"
#include "guru/util/hash.hpp"

namespace guru::corpus {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "guru-dataset/1";

std::string sequences_text(const DomainCorpus& c) {
  std::ostringstream out;
  for (std::size_t u = 0; u < c.sequences.size(); ++u) {
    out << c.user_ids[u] << '\t';
    for (std::size_t i = 0; i < c.sequences[u].size(); ++i)
      out << (i ? " " : "") << c.sequences[u][i];
    out << '\n';
  }
  return out.str();
}

std::string items_text(const DomainCorpus& c) {
  std::ostringstream out;
  for (int i = 1; i <= c.num_items; ++i)
    out << i << '\t' << c.item_ids[static_cast<std::size_t>(i - 1)] << '\t'
        << c.item_frequency[static_cast<std::size_t>(i)] << '\n';
  return out.str();
}

std::string overlap_text(const CrossDomainDataset& d) {
  std::ostringstream out;
  for (const auto& [ua, ub] : d.overlap)
    out << ua << '\t' << ub << '\t' << d.a.user_ids[static_cast<std::size_t>(ua)] << '\n';
  return out.str();
}

std::string split_text(const DomainCorpus& c) {
  const EvalSplit split = split_leave_one_out(c);
  std::ostringstream out;
  for (std::size_t u = 0; u < split.users.size(); ++u) {
    const UserSplit& s = split.users[u];
    out << u << '\t';
    for (std::size_t i = 0; i < s.train.size(); ++i) out << (i ? " " : "") << s.train[i];
    out << '\t' << (s.valid ? std::to_string(*s.valid) : "") << '\t'
        << (s.test ? std::to_string(*s.test) : "") << '\n';
  }
  return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

DomainCorpus parse_corpus(const std::string& seq_text, const std::string& item_text, Domain d) {
  DomainCorpus c;
  c.domain = d;
  for (const auto& line : lines_of(item_text)) {
    std::istringstream row(line);
    int idx;
    std::string raw;
    if (!(row >> idx) || !(row >> raw) || idx != c.num_items + 1)
      throw InputError("malformed items.tsv line: " + line);
    c.item_ids.push_back(raw);
    ++c.num_items;
  }
  for (const auto& line : lines_of(seq_text)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("malformed sequences.tsv line: " + line);
    c.user_ids.push_back(line.substr(0, tab));
    std::istringstream items(line.substr(tab + 1));
    std::vector<int> seq;
    int it;
    while (items >> it) seq.push_back(it);
    c.sequences.push_back(std::move(seq));
  }
  c.recompute_frequency();
  return c;
}

std::string canonical_hash(json manifest) {
  manifest.erase("manifest_hash");
  return hash_hex(manifest.dump());
}

}  // namespace

json dataset_counts(const CrossDomainDataset& data) {
  auto domain = [](const DomainCorpus& c) {
    return json{{"users", c.num_users()},
                {"items", c.num_items},
                {"interactions", c.num_interactions()},
                {"avg_len", c.mean_length()}};
  };
  return json{{"a", domain(data.a)},
              {"b", domain(data.b)},
              {"overlap", data.overlap.size()},
              {"overlap_rate", data.overlap_rate()}};
}

json save_dataset(const fs::path& dir, const CrossDomainDataset& data, const json& provenance) {
  const std::map<std::string, std::string> files = {
      {"corpus_a/sequences.tsv", sequences_text(data.a)},
      {"corpus_a/items.tsv", items_text(data.a)},
      {"corpus_b/sequences.tsv", sequences_text(data.b)},
      {"corpus_b/items.tsv", items_text(data.b)},
      {"overlap.tsv", overlap_text(data)},
      {"splits/a.tsv", split_text(data.a)},
      {"splits/b.tsv", split_text(data.b)},
  };
  json manifest;
  manifest["format"] = kFormat;
  manifest["provenance"] = provenance;
  manifest["counts"] = dataset_counts(data);
  json hashes = json::object();
  for (const auto& [name, text] : files) {
    write_file(dir / name, text);
    hashes[name] = hash_hex(text);
  }
  manifest["files"] = hashes;
  manifest["manifest_hash"] = canonical_hash(manifest);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

StoredDataset load_dataset(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw ArtifactMissingError("dataset manifest not found: " + mpath.string());
  json manifest = json::parse(read_file(mpath), nullptr, false);
  if (manifest.is_discarded() || manifest.value("format", "") != kFormat)
    throw InputError("not a dataset manifest: " + mpath.string());
  if (canonical_hash(manifest) != manifest.value("manifest_hash", ""))
    throw InputError("manifest hash mismatch in " + mpath.string());

  std::map<std::string, std::string> text;
  for (const auto& [name, expected] : manifest.at("files").items()) {
    text[name] = read_file(dir / name);
    if (hash_hex(text[name]) != expected.get<std::string>())
      throw InputError("content hash mismatch for " + (dir / name).string());
  }
  StoredDataset out;
  out.data.a = parse_corpus(text.at("corpus_a/sequences.tsv"), text.at("corpus_a/items.tsv"), Domain::A);
  out.data.b = parse_corpus(text.at("corpus_b/sequences.tsv"), text.at("corpus_b/items.tsv"), Domain::B);
  for (const auto& line : lines_of(text.at("overlap.tsv"))) {
    std::istringstream row(line);
    int ua, ub;
    if (!(row >> ua >> ub)) throw InputError("malformed overlap.tsv line: " + line);
    out.data.overlap.emplace_back(ua, ub);
  }
  out.manifest_hash = manifest.at("manifest_hash").get<std::string>();
  out.manifest = std::move(manifest);
  return out;
}

}  // namespace guru::corpus
