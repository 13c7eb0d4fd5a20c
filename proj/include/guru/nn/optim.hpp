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

#include <cstdint>
#include <map>
#include <string>

#include "guru/nn/parameter.hpp"

namespace guru::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Learning-rate schedule. `constant` returns base lr; `inverse_sqrt` is
/// the warmup schedule lr = factor · d^-0.5 · min(step^-0.5, step · warmup^-1.5).
struct LrSchedule {
  enum class Kind { constant, inverse_sqrt };
  Kind kind = Kind::constant;
  double factor = 1.0;
  int model_dim = 64;
  int warmup = 4000;

  double rate(double base_lr, std::int64_t step) const;
};

/// Adam with bias correction. Moments are keyed by parameter name so a
/// checkpoint can restore them independently of parameter order.
class Adam {
 public:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  Adam() = default;
  Adam(AdamConfig cfg, LrSchedule schedule = {}) : cfg_(cfg), schedule_(schedule) {}

  /// One update of every parameter in `params` from its accumulated grad.
  void step(const ParameterList& params);

  std::int64_t steps() const { return step_; }
  double current_lr() const { return schedule_.rate(cfg_.lr, step_ + 1); }
  const AdamConfig& config() const { return cfg_; }

  const std::map<std::string, Moments>& moments() const { return moments_; }
  std::map<std::string, Moments>& moments() { return moments_; }
  void set_steps(std::int64_t s) { step_ = s; }

 private:
  AdamConfig cfg_;
  LrSchedule schedule_;
  std::int64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace guru::nn
