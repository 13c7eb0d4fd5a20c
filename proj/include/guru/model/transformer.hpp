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
#include <vector>

#include "guru/nn/ops.hpp"
#include "guru/nn/parameter.hpp"
#include "guru/nn/tape.hpp"
#include "guru/util/rng.hpp"

namespace guru::model {

using nn::Matrix;
using nn::Parameter;
using nn::ParameterList;
using nn::Var;

/// Settings for one forward pass.
struct Pass {
  nn::Tape* tape = nullptr;
  double dropout = 0.0;
  Rng* rng = nullptr;

  Var bind(Parameter& p, bool trainable) const {
    return trainable ? tape->param(p) : tape->frozen(p);
  }
  Var drop(Var x) const {
    return dropout > 0.0 && rng != nullptr ? nn::dropout(x, dropout, *rng) : x;
  }
};

struct LayerNormParams {
  Parameter gain;
  Parameter bias;

  LayerNormParams() = default;
  LayerNormParams(const std::string& prefix, int d);
  void collect(ParameterList& out);
  void init();
  Var apply(const Pass& pass, Var x, bool trainable);
};

struct AttentionParams {
  Parameter wq, bq, wk, bk, wv, bv, wo, bo;

  AttentionParams() = default;
  AttentionParams(const std::string& prefix, int d);
  void collect(ParameterList& out);
  void init(Rng& rng);
  Var apply(const Pass& pass, Var queries, Var keys, const nn::AttentionShape& shape,
            bool trainable);
};

struct FeedForwardParams {
  Parameter w1, b1, w2, b2;

  FeedForwardParams() = default;
  FeedForwardParams(const std::string& prefix, int d, int d_ff);
  void collect(ParameterList& out);
  void init(Rng& rng);
  Var apply(const Pass& pass, Var x, bool trainable);
};

/// Pre-norm block: self-attention, optional cross-attention over one
/// context vector per sequence, feed-forward; each sublayer residual.
struct TransformerBlock {
  LayerNormParams ln_self;
  AttentionParams self_attn;
  bool has_cross = false;
  LayerNormParams ln_cross;
  AttentionParams cross_attn;
  LayerNormParams ln_ffn;
  FeedForwardParams ffn;

  TransformerBlock() = default;
  TransformerBlock(const std::string& prefix, int d, int d_ff, bool cross);
  void collect(ParameterList& out);
  void init(Rng& rng);
};

/// Rows of a batch: `batch` consecutive blocks of `len` positions.
struct SeqShape {
  int batch = 1;
  int len = 1;
  bool causal = false;
  std::vector<std::uint8_t> mask;  // per row; 0 marks [pad]
};

struct TransformerStack {
  std::vector<TransformerBlock> blocks;
  LayerNormParams final_ln;
  int heads = 1;

  TransformerStack() = default;
  TransformerStack(const std::string& prefix, int layers, int d, int heads, int d_ff, bool cross);
  void collect(ParameterList& out);
  void init(Rng& rng);

  /// `context` holds one row per sequence and is required iff the stack
  /// has cross-attention.
  Var forward(const Pass& pass, Var x, const SeqShape& shape, Var context, bool trainable);
};

/// Item and positional embeddings of one domain. Item rows: 0 = [pad],
/// 1..num_items, num_items + 1 = [eos].
struct EmbeddingTables {
  Parameter item_table;
  Parameter positional;
  int num_items = 0;

  EmbeddingTables() = default;
  EmbeddingTables(const std::string& prefix, int num_items, int positions, int d);
  void collect(ParameterList& out);
  void init(Rng& rng);
  int eos_token() const { return num_items + 1; }

  /// e_t = item_table[token_t] + positional[t mod len]. Throws
  /// InvariantError on an out-of-range token or a too long sequence.
  Var embed(const Pass& pass, const std::vector<int>& tokens, int len, bool trainable);
};

}  // namespace guru::model
