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

#include <string>

#include "guru/model/transformer.hpp"

namespace guru::adversary {

using model::Pass;
using nn::Matrix;
using nn::Parameter;
using nn::ParameterList;
using nn::Var;

enum class AdversaryMode { wgan_gp, nll };

AdversaryMode parse_adversary_mode(const std::string& s);
const char* adversary_mode_name(AdversaryMode m);

struct AdversaryConfig {
  AdversaryMode mode = AdversaryMode::wgan_gp;
  double lambda_gp = 10.0;
  int critic_iters = 5;

  /// Throws ConfigError.
  void validate() const;
};

/// Domain critic f: four fully connected layers d → hidden → hidden →
/// hidden → 1 with leaky-ReLU (slope 0.2) in between and no output
/// squashing.
class Critic {
 public:
  static constexpr double kSlope = 0.2;

  Critic() = default;
  Critic(int d, int hidden = 128);

  void init(Rng& rng);
  ParameterList parameters();

  /// f for each row of h (rows × 1).
  Var score(const Pass& pass, Var h, bool trainable);

  /// ∇_h f for each row of the constant inputs `points`, built from tape
  /// ops so it is differentiable in the critic parameters. The activation
  /// slopes are piecewise constant in the parameters and enter as
  /// constants.
  Var input_gradient(const Pass& pass, const Matrix& points, bool trainable);

  Parameter w1, b1, w2, b2, w3, b3, w4, b4;
};

/// Scalar critic output for a single vector.
double critic_score(Critic& critic, const Eigen::RowVectorXd& h);

/// mean over rows of (||∇f(p)||₂ − 1)².
Var gradient_penalty(const Pass& pass, Critic& critic, const Matrix& points, bool trainable);

struct CriticDiagnostics {
  double wasserstein = 0.0;  // mean f(A) − mean f(B)
  double penalty = 0.0;      // gradient-penalty term before weighting
};

/// Critic objective, minimized over critic parameters.
///
/// wgan_gp: mean f(B) − mean f(A) + λ · GP over interpolates
///          ε·h_a + (1 − ε)·h_b with one uniform ε per pair from `rng`.
/// nll:     binary cross-entropy of σ(f) with label 1 for domain A,
///          averaged over both batches.
Var critic_loss(const Pass& pass, Critic& critic, Var batch_a, Var batch_b,
                const AdversaryConfig& cfg, Rng& rng, CriticDiagnostics* diag = nullptr);

/// The −L_dis term for the encoder, with the critic frozen.
///
/// wgan_gp: mean f(A) − mean f(B).  nll: the negated critic cross-entropy.
Var generator_adv_loss(const Pass& pass, Critic& critic, Var batch_a, Var batch_b,
                       AdversaryMode mode);

/// mean over rows of ||h_a − h_b||₂; zero for empty inputs.
Var l2_overlap_loss(nn::Tape& tape, Var h_a, Var h_b);

}  // namespace guru::adversary
