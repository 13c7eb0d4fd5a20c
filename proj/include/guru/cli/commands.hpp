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
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "guru/cli/config.hpp"
#include "guru/eval/report.hpp"
#include "guru/trainer/trainer.hpp"

namespace guru::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitArtifactMissing = 3,
};

/// InputError, ConfigError, LookupError and CorpusDegenerateError are input
/// errors; ArtifactMissingError is its own code; everything else is
/// internal.
int exit_code_for(const std::exception& e);

/// Exclusive advisory lock on `dir`/.lock for the lifetime of the object.
/// Throws InputError when another process holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

using Logger = std::function<void(const std::string&)>;

/// Ingest, preprocess, link and (optionally) subsample the raw files, then
/// store the dataset. Returns its manifest.
nlohmann::json cmd_prepare(const ExperimentConfig& cfg, const Logger& log = {});

/// Generate and store the synthetic dataset; `seed` overrides the config.
nlohmann::json cmd_synth(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed = {},
                         const Logger& log = {});

/// Loads the prepared dataset. Throws ArtifactMissingError when absent.
trainer::TrainingData load_training_data(const ExperimentConfig& cfg);

/// run_all for the configured variant under output/<variant>/.
trainer::RunResult cmd_train(const ExperimentConfig& cfg, const std::string& stop_after = "",
                             const Logger& log = {});

/// Test-split metrics of the trained variant (from `checkpoint`, or the
/// latest fine-tune checkpoint of each domain) plus the configured
/// baselines. Writes output/<variant>/eval/{report.json, ranks.csv}.
eval::MetricsReport cmd_eval(const ExperimentConfig& cfg,
                             const std::optional<std::filesystem::path>& checkpoint = {},
                             const Logger& log = {});

/// Loss-curve CSV and SVG files for every trace log under `traces` (a
/// directory or a single .log file). Returns the written files.
///
/// CSV columns, by stage:
///   pretrain*     steps:      step,lr,loss_A,loss_B
///                 epochs:     epoch,loss_A,loss_B
///   adversarial   iterations: iteration,critic_loss,wasserstein,gradient_penalty,loss_A,loss_B,adversarial,l2
///   finetune_*    steps:      step,loss
///                 epochs:     epoch,loss,val_hr@10
/// Throws InputError on an empty or unreadable trace.
std::vector<std::filesystem::path> cmd_plot(const std::filesystem::path& traces,
                                            const std::filesystem::path& out);

/// Data (if not yet prepared), all three variants and the baselines, with
/// one combined report under output/.
eval::MetricsReport cmd_run_all(const ExperimentConfig& cfg, const Logger& log = {});

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace guru::cli
