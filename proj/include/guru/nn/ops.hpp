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
#include <vector>

#include "guru/nn/tape.hpp"

namespace guru::nn {

// Differentiable operations over row-major matrices. Every op records its
// own backward rule on the tape of its inputs.

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_nt(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// x + 1·bias, bias is 1 × cols.
Var add_bias(Var x, Var bias);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
/// Elementwise product.
Var mul(Var a, Var b);
/// Elementwise product with a constant mask (no gradient to the mask).
Var mul_const(Var a, const Matrix& mask);

Var relu(Var a);
Var leaky_relu(Var a, double slope);
/// ln(1 + e^x), numerically stable.
Var softplus(Var a);
Var square(Var a);

Var sum(Var a);
Var mean(Var a);

/// Per-row dot product of two equally shaped matrices, R × 1.
Var row_dot(Var a, Var b);
/// Per-row Euclidean norm, R × 1. Gradient at a zero row is zero.
Var row_l2_norm(Var a);

/// out[i] = table[index[i]]; backward scatter-adds into the table.
Var gather_rows(Var table, const std::vector<int>& index);
/// Averages consecutive groups of `group` rows.
Var segment_mean_rows(Var x, int group);
Var concat_rows(Var a, Var b);
/// Repeats a 1 × c row n times.
Var broadcast_rows(Var row, Eigen::Index n);

/// Row-wise layer normalization with learned gain and bias (1 × cols).
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// Batched multi-head scaled dot-product attention.
///
/// Queries are laid out as `batch` consecutive blocks of `q_len` rows and
/// keys/values as `batch` blocks of `k_len` rows; heads split the columns.
/// Keys with key_mask == 0 receive exactly zero weight. With `causal`,
/// query i only sees keys j <= i (requires q_len == k_len). A query whose
/// every key is masked outputs zeros.
struct AttentionShape {
  int batch = 1;
  int q_len = 1;
  int k_len = 1;
  int heads = 1;
  bool causal = false;
  std::vector<std::uint8_t> key_mask;  // empty means all keys visible
};
Var attention(Var q, Var k, Var v, const AttentionShape& shape);

/// Inverted dropout; identity when rate == 0.
Var dropout(Var x, double rate, Rng& rng);

/// Cross-entropy over candidate sets with tied output embeddings.
///
/// Row r of `candidates` lists item rows of `table` with the target in
/// column 0; logits are hidden[r] · table[c]. Returns the mean over rows
/// of logsumexp(logits) − logit(target).
Var candidate_softmax_xent(Var hidden, Var table,
                           const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>& candidates);

}  // namespace guru::nn
