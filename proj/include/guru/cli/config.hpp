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
#include <optional>
#include <string>
#include <vector>

#include "guru/corpus/ingest.hpp"
#include "guru/corpus/preprocess.hpp"
#include "guru/corpus/synthetic.hpp"
#include "guru/trainer/config.hpp"

namespace guru::cli {

struct RawDomainSource {
  std::filesystem::path path;
  corpus::RecordFormat format = corpus::RecordFormat::tsv;
};

struct DataConfig {
  enum class Source { synthetic, raw };
  Source source = Source::synthetic;
  corpus::SyntheticParams synthetic;
  std::uint64_t synthetic_seed = 1;
  RawDomainSource raw_a;
  RawDomainSource raw_b;
  corpus::PreprocessOptions preprocess;
  /// Subsample the overlapped users down to this rate after linking.
  std::optional<double> overlap_rate;
  std::uint64_t subsample_seed = 1;
  /// Prepared dataset directory.
  std::filesystem::path dir;
};

/// The whole experiment: data, model/training (TrainConfig), evaluation,
/// variant and output directory. Schema: docs/config.md.
struct ExperimentConfig {
  DataConfig data;
  trainer::TrainConfig train;
  /// Extra rankers evaluated next to the model ("POP", "BPRMF").
  std::vector<std::string> baselines = {"POP", "BPRMF"};
  std::filesystem::path output;

  /// Checkpoints, traces and report of one variant.
  std::filesystem::path variant_dir(trainer::Variant v) const;
};

/// Environment variable that, when set, is the root for relative output
/// and data paths.
inline constexpr const char* kOutputRootEnv = "GURU_OUTPUT_ROOT";

/// Validates `j` against the schema; relative input paths resolve against
/// `config_dir`, relative output paths against $GURU_OUTPUT_ROOT (or the
/// working directory). Throws ConfigError naming the field.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& config_dir = ".");

/// Reads and parses a JSON config file. Throws InputError when the file
/// is missing or not JSON.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace guru::cli
