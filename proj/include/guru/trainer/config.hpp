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
#include <string>
#include <vector>

#include "guru/adversary/critic.hpp"
#include "guru/corpus/types.hpp"
#include "guru/model/autoencoder.hpp"
#include "guru/nn/optim.hpp"

namespace guru::trainer {

enum class Variant { SeqRec, AutoRec, RecGURU };

Variant parse_variant(const std::string& s);
const char* variant_name(Variant v);

struct EvalSettings {
  int n_neg = 200;
  std::vector<int> ks = {5, 10, 20};
  std::uint64_t seed = 2022;
};

struct TrainConfig {
  model::ModelDims model;
  int window = 20;      // m
  int n_sampled = 20;   // reconstruction negatives
  int n_bpr_neg = 5;
  int batch_size = 128;
  int critic_hidden = 128;
  adversary::AdversaryConfig adversary;
  double w_rec = 1.0;
  double w_adv = 1.0;
  double w_l2 = 1.0;

  int pretrain_epochs = 30;
  int adversarial_iters = 1000;
  int finetune_epochs = 20;
  /// Training examples (prefix, next item) drawn per user per fine-tune
  /// epoch; the last training item is always one of them.
  int finetune_cuts = 4;
  /// Lets fine-tuning update the encoder and embedding tables.
  bool unfreeze = false;

  nn::AdamConfig pretrain_adam{1.0, 0.9, 0.98, 1e-8};
  int pretrain_warmup = 400;
  nn::AdamConfig critic_adam{1e-4, 0.5, 0.9, 1e-8};
  nn::AdamConfig generator_adam{1e-4, 0.5, 0.9, 1e-8};
  nn::AdamConfig finetune_adam{1e-3, 0.9, 0.9, 1e-8};

  /// Periodic checkpoints inside a phase (epochs or iterations); 0 = only
  /// at phase ends.
  int checkpoint_every = 0;

  EvalSettings eval;
  Variant variant = Variant::RecGURU;
  std::vector<corpus::Domain> finetune_domains = {corpus::Domain::A, corpus::Domain::B};
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Every field, with defaults filled in.
nlohmann::json to_json(const TrainConfig& cfg);

/// Unknown keys and wrongly typed values are rejected with a ConfigError
/// naming the field path.
TrainConfig train_config_from_json(const nlohmann::json& j);

/// FNV-1a of the canonical JSON dump.
std::string config_hash(const TrainConfig& cfg);

}  // namespace guru::trainer
