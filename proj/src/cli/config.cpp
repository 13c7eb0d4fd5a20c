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

#include "guru/cli/config.hpp"

#include <cstdlib>
#include <fstream>

#include "guru/util/error.hpp"
#include "guru/util/json_reader.hpp"

namespace guru::cli {

namespace {

std::filesystem::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env && *env ? std::filesystem::path(env) : std::filesystem::current_path();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

RawDomainSource read_source(JsonReader r, const std::filesystem::path& config_dir) {
  RawDomainSource s;
  std::string path, format = "tsv";
  r.get("path", path);
  r.get("format", format);
  r.finish();
  if (path.empty()) throw ConfigError(r.field("path") + ": required");
  try {
    s.format = corpus::parse_record_format(format);
  } catch (const ConfigError& e) {
    throw ConfigError(r.field("format") + ": " + e.what());
  }
  s.path = resolve(config_dir, path);
  return s;
}

}  // namespace

std::filesystem::path ExperimentConfig::variant_dir(trainer::Variant v) const {
  return output / trainer::variant_name(v);
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& config_dir) {
  ExperimentConfig cfg;
  JsonReader r(j, "");
  std::string output = "runs/default";
  r.get("output", output);
  cfg.output = resolve(output_root(), output);

  // data
  {
    auto d = r.child("data");
    std::string source = "synthetic";
    d.get("source", source);
    if (source == "synthetic")
      cfg.data.source = DataConfig::Source::synthetic;
    else if (source == "raw")
      cfg.data.source = DataConfig::Source::raw;
    else
      throw ConfigError(d.field("source") + ": expected \"synthetic\" or \"raw\"");
    std::string dir;
    d.get("dir", dir);
    cfg.data.dir = dir.empty() ? cfg.output / "data" : resolve(output_root(), dir);
    {
      auto s = d.child("synthetic");
      auto& p = cfg.data.synthetic;
      s.get("users_per_domain", p.users_per_domain);
      s.get("items_per_domain", p.items_per_domain);
      s.get("overlap_count", p.overlap_count);
      s.get("latent_dim", p.latent_dim);
      s.get("mean_len_a", p.mean_len_a);
      s.get("mean_len_b", p.mean_len_b);
      s.get("sparsity_skew", p.sparsity_skew);
      s.get("primary_share", p.primary_share);
      s.get("secondary_share", p.secondary_share);
      s.get("k_core", p.k_core);
      s.get("seed", cfg.data.synthetic_seed);
      s.finish();
    }
    if (d.has("raw")) {
      auto raw = d.child("raw");
      cfg.data.raw_a = read_source(raw.child("a"), config_dir);
      cfg.data.raw_b = read_source(raw.child("b"), config_dir);
      raw.get("rating_min", cfg.data.preprocess.rating_min);
      raw.get("k_core", cfg.data.preprocess.k_core);
      if (raw.has("min_timestamp")) {
        std::int64_t ts = 0;
        raw.get("min_timestamp", ts);
        cfg.data.preprocess.min_timestamp = ts;
      }
      raw.finish();
      if (cfg.data.preprocess.k_core < 1) throw ConfigError("data.raw.k_core: must be positive");
    } else if (cfg.data.source == DataConfig::Source::raw) {
      throw ConfigError("data.raw: required when data.source is \"raw\"");
    }
    if (d.has("overlap_rate")) {
      double rate = 0.0;
      d.get("overlap_rate", rate);
      if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("data.overlap_rate: must be in (0, 1]");
      cfg.data.overlap_rate = rate;
    }
    d.get("subsample_seed", cfg.data.subsample_seed);
    d.finish();
  }

  // model + eval + variant form the training configuration.
  nlohmann::json train = j.contains("model") ? j.at("model") : nlohmann::json::object();
  if (!train.is_object()) throw ConfigError("model: expected an object");
  for (const char* reserved : {"eval", "variant"})
    if (train.contains(reserved)) throw ConfigError(std::string("model.") + reserved + ": unknown field");
  r.child("model");
  {
    auto e = r.child("eval");
    nlohmann::json ev = j.contains("eval") ? j.at("eval") : nlohmann::json::object();
    if (ev.is_object() && ev.contains("baselines")) {
      e.get("baselines", cfg.baselines);
      for (const auto& b : cfg.baselines)
        if (b != "POP" && b != "BPRMF") throw ConfigError("eval.baselines: unknown baseline '" + b + "'");
      ev.erase("baselines");
    }
    train["eval"] = ev;
  }
  if (j.contains("variant")) {
    std::string v;
    r.get("variant", v);
    train["variant"] = v;
  }
  r.finish();
  try {
    cfg.train = trainer::train_config_from_json(train);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind("eval", 0) == 0 || msg.rfind("variant", 0) == 0) throw;
    throw ConfigError("model." + msg);
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path.string());
  std::ifstream in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j, path.has_parent_path() ? path.parent_path() : ".");
}

}  // namespace guru::cli
