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

#include "guru/nn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "guru/util/error.hpp"

namespace guru::nn {

double LrSchedule::rate(double base_lr, std::int64_t step) const {
  if (kind == Kind::constant) return base_lr;
  const double s = static_cast<double>(std::max<std::int64_t>(step, 1));
  const double w = static_cast<double>(std::max(warmup, 1));
  return factor * std::pow(static_cast<double>(model_dim), -0.5) *
         std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

void Adam::step(const ParameterList& params) {
  ++step_;
  const double lr = schedule_.rate(cfg_.lr, step_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (Parameter* p : params) {
    if (!p->grad.allFinite())
      throw NonFiniteError("non-finite gradient in parameter " + p->name);
    auto it = moments_.find(p->name);
    if (it == moments_.end()) {
      it = moments_
               .emplace(p->name, Moments{Matrix::Zero(p->value.rows(), p->value.cols()),
                                         Matrix::Zero(p->value.rows(), p->value.cols())})
               .first;
    }
    Moments& mo = it->second;
    mo.m = cfg_.beta1 * mo.m + (1.0 - cfg_.beta1) * p->grad;
    mo.v = cfg_.beta2 * mo.v + (1.0 - cfg_.beta2) * p->grad.cwiseAbs2();
    p->value.array() -=
        lr * (mo.m.array() / bc1) / ((mo.v.array() / bc2).sqrt() + cfg_.eps);
  }
}

}  // namespace guru::nn
