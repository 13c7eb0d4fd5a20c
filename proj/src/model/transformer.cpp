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

#include "guru/model/transformer.hpp"

#include <cmath>

#include "guru/util/error.hpp"

namespace guru::model {

LayerNormParams::LayerNormParams(const std::string& prefix, int d)
    : gain(prefix + ".gain", 1, d), bias(prefix + ".bias", 1, d) {
  init();
}

void LayerNormParams::collect(ParameterList& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

void LayerNormParams::init() {
  gain.value.setOnes();
  bias.value.setZero();
}

Var LayerNormParams::apply(const Pass& pass, Var x, bool trainable) {
  return nn::layer_norm(x, pass.bind(gain, trainable), pass.bind(bias, trainable));
}

AttentionParams::AttentionParams(const std::string& prefix, int d)
    : wq(prefix + ".wq", d, d), bq(prefix + ".bq", 1, d),
      wk(prefix + ".wk", d, d), bk(prefix + ".bk", 1, d),
      wv(prefix + ".wv", d, d), bv(prefix + ".bv", 1, d),
      wo(prefix + ".wo", d, d), bo(prefix + ".bo", 1, d) {}

void AttentionParams::collect(ParameterList& out) {
  for (Parameter* p : {&wq, &bq, &wk, &bk, &wv, &bv, &wo, &bo}) out.push_back(p);
}

void AttentionParams::init(Rng& rng) {
  for (Parameter* w : {&wq, &wk, &wv, &wo}) nn::init_xavier_uniform(*w, rng);
  for (Parameter* b : {&bq, &bk, &bv, &bo}) b->value.setZero();
}

Var AttentionParams::apply(const Pass& pass, Var queries, Var keys,
                           const nn::AttentionShape& shape, bool trainable) {
  auto proj = [&](Var x, Parameter& w, Parameter& b) {
    return nn::add_bias(nn::matmul(x, pass.bind(w, trainable)), pass.bind(b, trainable));
  };
  Var q = proj(queries, wq, bq);
  Var k = proj(keys, wk, bk);
  Var v = proj(keys, wv, bv);
  return proj(nn::attention(q, k, v, shape), wo, bo);
}

FeedForwardParams::FeedForwardParams(const std::string& prefix, int d, int d_ff)
    : w1(prefix + ".w1", d, d_ff), b1(prefix + ".b1", 1, d_ff),
      w2(prefix + ".w2", d_ff, d), b2(prefix + ".b2", 1, d) {}

void FeedForwardParams::collect(ParameterList& out) {
  for (Parameter* p : {&w1, &b1, &w2, &b2}) out.push_back(p);
}

void FeedForwardParams::init(Rng& rng) {
  nn::init_xavier_uniform(w1, rng);
  nn::init_xavier_uniform(w2, rng);
  b1.value.setZero();
  b2.value.setZero();
}

Var FeedForwardParams::apply(const Pass& pass, Var x, bool trainable) {
  Var h = nn::relu(nn::add_bias(nn::matmul(x, pass.bind(w1, trainable)), pass.bind(b1, trainable)));
  return nn::add_bias(nn::matmul(h, pass.bind(w2, trainable)), pass.bind(b2, trainable));
}

TransformerBlock::TransformerBlock(const std::string& prefix, int d, int d_ff, bool cross)
    : ln_self(prefix + ".ln_self", d),
      self_attn(prefix + ".self_attn", d),
      has_cross(cross),
      ln_ffn(prefix + ".ln_ffn", d),
      ffn(prefix + ".ffn", d, d_ff) {
  if (cross) {
    ln_cross = LayerNormParams(prefix + ".ln_cross", d);
    cross_attn = AttentionParams(prefix + ".cross_attn", d);
  }
}

void TransformerBlock::collect(ParameterList& out) {
  ln_self.collect(out);
  self_attn.collect(out);
  if (has_cross) {
    ln_cross.collect(out);
    cross_attn.collect(out);
  }
  ln_ffn.collect(out);
  ffn.collect(out);
}

void TransformerBlock::init(Rng& rng) {
  ln_self.init();
  self_attn.init(rng);
  if (has_cross) {
    ln_cross.init();
    cross_attn.init(rng);
  }
  ln_ffn.init();
  ffn.init(rng);
}

TransformerStack::TransformerStack(const std::string& prefix, int layers, int d, int heads_,
                                   int d_ff, bool cross)
    : final_ln(prefix + ".final_ln", d), heads(heads_) {
  if (layers < 1 || heads_ < 1 || d % heads_ != 0)
    throw ConfigError("transformer: need layers >= 1 and d divisible by heads");
  blocks.reserve(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l)
    blocks.emplace_back(prefix + ".layer" + std::to_string(l), d, d_ff, cross);
}

void TransformerStack::collect(ParameterList& out) {
  for (auto& b : blocks) b.collect(out);
  final_ln.collect(out);
}

void TransformerStack::init(Rng& rng) {
  for (auto& b : blocks) b.init(rng);
  final_ln.init();
}

Var TransformerStack::forward(const Pass& pass, Var x, const SeqShape& shape, Var context,
                              bool trainable) {
  nn::AttentionShape self{shape.batch, shape.len, shape.len, heads, shape.causal, shape.mask};
  nn::AttentionShape cross{shape.batch, shape.len, 1, heads, false, {}};
  for (auto& block : blocks) {
    Var a = block.ln_self.apply(pass, x, trainable);
    x = nn::add(x, pass.drop(block.self_attn.apply(pass, a, a, self, trainable)));
    if (block.has_cross) {
      if (context.tape() == nullptr) throw InvariantError("cross-attention needs a context");
      Var c = block.ln_cross.apply(pass, x, trainable);
      x = nn::add(x, pass.drop(block.cross_attn.apply(pass, c, context, cross, trainable)));
    }
    Var f = block.ln_ffn.apply(pass, x, trainable);
    x = nn::add(x, pass.drop(block.ffn.apply(pass, f, trainable)));
  }
  return final_ln.apply(pass, x, trainable);
}

EmbeddingTables::EmbeddingTables(const std::string& prefix, int num_items_, int positions, int d)
    : item_table(prefix + ".item_table", num_items_ + 2, d),
      positional(prefix + ".positional", positions, d),
      num_items(num_items_) {}

void EmbeddingTables::collect(ParameterList& out) {
  out.push_back(&item_table);
  out.push_back(&positional);
}

void EmbeddingTables::init(Rng& rng) {
  const double std = 1.0 / std::sqrt(static_cast<double>(item_table.value.cols()));
  nn::init_normal(item_table, std, rng);
  nn::init_normal(positional, std, rng);
}

Var EmbeddingTables::embed(const Pass& pass, const std::vector<int>& tokens, int len,
                           bool trainable) {
  if (len < 1 || len > positional.value.rows())
    throw InvariantError("embed: sequence length " + std::to_string(len) +
                         " exceeds the positional table");
  if (tokens.size() % static_cast<std::size_t>(len) != 0)
    throw InvariantError("embed: token count is not a multiple of the length");
  std::vector<int> pos(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || tokens[i] > num_items + 1)
      throw InvariantError("embed: token " + std::to_string(tokens[i]) + " out of range");
    pos[i] = static_cast<int>(i % static_cast<std::size_t>(len));
  }
  return nn::add(nn::gather_rows(pass.bind(item_table, trainable), tokens),
                 nn::gather_rows(pass.bind(positional, trainable), pos));
}

}  // namespace guru::model
