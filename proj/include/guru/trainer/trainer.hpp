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

#include <array>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "guru/adversary/critic.hpp"
#include "guru/cdsrec/recommender.hpp"
#include "guru/corpus/split.hpp"
#include "guru/eval/metrics.hpp"
#include "guru/eval/report.hpp"
#include "guru/model/autoencoder.hpp"
#include "guru/nn/optim.hpp"
#include "guru/trainer/checkpoint.hpp"
#include "guru/trainer/config.hpp"

namespace guru::trainer {

using corpus::Domain;

/// A dataset with its leave-one-out splits. Training only ever reads the
/// training prefixes.
struct TrainingData {
  corpus::CrossDomainDataset data;
  std::array<corpus::EvalSplit, 2> splits;
  /// Manifest hash of the stored dataset, or empty for in-memory data.
  std::string data_hash;

  explicit TrainingData(corpus::CrossDomainDataset dataset, std::string hash = "");
  const corpus::EvalSplit& split(Domain d) const { return splits[d == Domain::A ? 0 : 1]; }
  /// Training prefix of every user of domain `d` (possibly empty).
  std::vector<std::vector<int>> train_sequences(Domain d) const;
};

/// Every learnable tensor, the optimizer moments and the bookkeeping that
/// makes a run resumable.
class TrainState {
 public:
  /// Parameters are initialized from Rng::derive(cfg.seed, 0), identically
  /// for every variant.
  TrainState(const TrainConfig& cfg, int num_items_a, int num_items_b);

  const TrainConfig& config() const { return cfg_; }

  model::Autoencoder model;
  adversary::Critic critic;
  std::array<cdsrec::Recommender, 2> recommenders;
  nn::Adam pretrain_opt;
  nn::Adam critic_opt;
  nn::Adam generator_opt;
  std::array<nn::Adam, 2> finetune_opt;

  cdsrec::Recommender& recommender(Domain d) { return recommenders[d == Domain::A ? 0 : 1]; }
  nn::Adam& finetune_optimizer(Domain d) { return finetune_opt[d == Domain::A ? 0 : 1]; }

  /// Name of the stage in progress or last completed, e.g. "pretrain".
  std::string phase = "init";
  /// Epochs or iterations completed within `phase`.
  std::int64_t iteration = 0;
  bool phase_complete = false;
  std::int64_t critic_updates = 0;
  std::int64_t generator_updates = 0;
  Rng rng;
  /// Per-stage JSON records, one array per stage name.
  nlohmann::json traces = nlohmann::json::object();
  /// Per-stage scalar results (overlap distances, selected epoch, ...).
  nlohmann::json summary = nlohmann::json::object();
  /// Best-validation parameter snapshot of the fine-tune in progress.
  std::map<std::string, nn::Matrix> best;
  double best_score = -1.0;

  nn::ParameterList all_parameters();
  nn::ConstParameterList critic_parameters() const;

  /// Starts a new stage: resets the counters and reseeds the stage RNG.
  void begin_phase(const std::string& name, std::uint64_t stream);

  Checkpoint to_checkpoint();
  /// Throws InputError if the checkpoint was written under a different
  /// config or a tensor shape differs.
  void load(const Checkpoint& ckpt);

  void append_trace(const nlohmann::json& record);

 private:
  TrainConfig cfg_;
};

/// Called at periodic checkpoint boundaries inside a phase and at its end.
using CheckpointHook = std::function<void(TrainState&)>;

/// Reconstruction pre-training over the training prefixes of `domains`.
/// Records the loss of every step and the mean per epoch and domain.
void pretrain(const TrainingData& data, TrainState& state, const std::vector<Domain>& domains,
              const CheckpointHook& hook = {});

/// Alternates critic_iters critic updates with one generator update of
/// w_rec·L_rec + w_adv·(−L_dis) + w_l2·L_l2 until the iteration budget.
void adversarial_phase(const TrainingData& data, TrainState& state, const CheckpointHook& hook = {});

/// BPR fine-tuning of the domain's recommender with per-epoch validation
/// HR@10; the best-validation parameters are restored at the end.
void finetune(const TrainingData& data, Domain domain, TrainState& state,
              const CheckpointHook& hook = {});

/// Ranking scorer of the trained recommender (no dropout).
eval::Scorer make_scorer(TrainState& state, Domain domain);

/// Mean per-token reconstruction NLL with the full softmax over the
/// training prefixes of `domain`, without dropout.
double reconstruction_nll(TrainState& state, const TrainingData& data, Domain domain);

/// Mean ||h_a − h_b||₂ over the overlapped users; 0 without overlap.
double overlap_distance(TrainState& state, const TrainingData& data);

/// One stage of a run: its name doubles as checkpoint subdirectory and
/// trace file name.
struct Stage {
  enum class Kind { pretrain, adversarial, finetune };
  std::string name;
  Kind kind;
  std::vector<Domain> domains;
  std::string parent;  // stage whose final state this one starts from
};

/// SeqRec: fine-tune; AutoRec: single-domain pretrain + fine-tune per
/// domain; RecGURU: pretrain on both, adversarial, fine-tune per domain.
std::vector<Stage> plan_stages(const TrainConfig& cfg);

struct RunOptions {
  std::filesystem::path out;
  /// Stop (as if interrupted) once this stage has finished.
  std::string stop_after;
  std::function<void(const std::string&)> log;
};

struct RunResult {
  eval::MetricsReport report;
  bool complete = false;
  /// State at the end of the last stage run or loaded.
  std::unique_ptr<TrainState> state;
  nlohmann::json summary = nlohmann::json::object();
};

/// Runs every stage of the variant with checkpoints under
/// out/{stage}/{iter}.ckpt, traces under out/traces/{stage}.log, then the
/// test-split report. Completed stages are loaded instead of rerun and a
/// partially completed stage resumes from its latest checkpoint.
RunResult run_all(const TrainingData& data, const TrainConfig& cfg, const RunOptions& options);

/// Writes `state` with the dataset's manifest hash attached.
void save_run_checkpoint(const std::filesystem::path& path, TrainState& state,
                         const std::string& data_hash);

/// Loads a checkpoint written by run_all. Throws InputError when it was
/// written for another dataset or configuration.
void load_run_checkpoint(const std::filesystem::path& path, TrainState& state,
                         const std::string& data_hash);

/// Latest checkpoint of a stage directory, or empty if there is none.
std::filesystem::path latest_checkpoint(const std::filesystem::path& stage_dir);

/// Report metadata: hashes, seeds and protocol settings.
nlohmann::json report_meta(const TrainConfig& cfg, const std::string& data_hash);

}  // namespace guru::trainer
