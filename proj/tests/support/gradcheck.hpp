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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "guru/nn/parameter.hpp"

namespace guru::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;
  int checked = 0;
};

/// Compares the analytic gradient already stored in each Parameter::grad
/// against central differences of `loss`. Relative error uses
/// |a − n| / max(|a|, |n|, floor) so tiny gradients are judged absolutely.
inline GradCheckResult central_difference_check(
    const std::vector<nn::Parameter*>& params, const std::function<double()>& loss,
    double step = 1e-5, double floor = 1e-6, int max_entries_per_param = 64) {
  GradCheckResult result;
  for (nn::Parameter* p : params) {
    const Eigen::Index n = p->value.size();
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / max_entries_per_param);
    for (Eigen::Index i = 0; i < n; i += stride) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + step;
      const double up = loss();
      x = saved - step;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad.data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst = p->name + "[" + std::to_string(i) + "] analytic=" +
                       std::to_string(analytic) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return result;
}

}  // namespace guru::testing
