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

#include "guru/model/autoencoder.hpp"

#include <algorithm>
#include <numeric>

#include "guru/util/error.hpp"

namespace guru::model {

TokenBatch pack(const std::vector<corpus::PaddedSequence>& seqs) {
  TokenBatch b;
  b.batch = static_cast<int>(seqs.size());
  b.len = seqs.empty() ? 0 : seqs.front().length();
  for (const auto& s : seqs) {
    if (s.length() != b.len) throw InvariantError("pack: sequences differ in length");
    b.tokens.insert(b.tokens.end(), s.tokens.begin(), s.tokens.end());
    b.mask.insert(b.mask.end(), s.mask.begin(), s.mask.end());
  }
  return b;
}

TokenBatch pad_batch(const std::vector<std::vector<int>>& seqs, int max_len, int num_items) {
  std::vector<corpus::PaddedSequence> padded;
  padded.reserve(seqs.size());
  for (const auto& s : seqs) padded.push_back(corpus::pad_or_truncate(s, max_len, num_items));
  return pack(padded);
}

Autoencoder::Autoencoder(const ModelDims& dims, int num_items_a, int num_items_b)
    : dims_(dims),
      tables_{EmbeddingTables("tables_a", num_items_a, dims.max_len + 1, dims.d),
              EmbeddingTables("tables_b", num_items_b, dims.max_len + 1, dims.d)},
      encoder_("encoder", dims.layers, dims.d, dims.heads, dims.d_ff, false),
      decoders_{TransformerStack("decoder_a", dims.layers, dims.d, dims.heads, dims.d_ff, true),
                TransformerStack("decoder_b", dims.layers, dims.d, dims.heads, dims.d_ff, true)} {
  if (dims.max_len < 1 || dims.d < 1) throw ConfigError("model: max_len and d must be positive");
}

void Autoencoder::init(Rng& rng) {
  for (auto& t : tables_) t.init(rng);
  encoder_.init(rng);
  for (auto& dec : decoders_) dec.init(rng);
}

ParameterList Autoencoder::parameters() {
  ParameterList out = table_parameters(Domain::A);
  for (Parameter* p : table_parameters(Domain::B)) out.push_back(p);
  encoder_.collect(out);
  for (auto& dec : decoders_) dec.collect(out);
  return out;
}

ParameterList Autoencoder::table_parameters(Domain d) {
  ParameterList out;
  tables(d).collect(out);
  return out;
}

ParameterList Autoencoder::encoder_parameters() {
  ParameterList out;
  encoder_.collect(out);
  return out;
}

ParameterList Autoencoder::decoder_parameters(Domain d) {
  ParameterList out;
  decoder(d).collect(out);
  return out;
}

Encoded encode(const Pass& pass, Autoencoder& model, Domain domain, const TokenBatch& input,
               const Trainable& trainable) {
  const int eos = model.tables(domain).eos_token();
  for (int b = 0; b < input.batch; ++b) {
    const auto last = static_cast<std::size_t>((b + 1) * input.len - 1);
    if (input.tokens[last] != eos) throw InvariantError("encode: sequence does not end in [eos]");
    if (input.len < 2 || input.tokens[last - 1] == corpus::kPadToken)
      throw InvariantError("encode: sequence has no content to encode");
  }
  Var x = pass.drop(model.tables(domain).embed(pass, input.tokens, input.len, trainable.tables));
  Encoded out;
  out.states = model.encoder().forward(pass, x, input.shape(false), Var(), trainable.encoder);
  std::vector<int> eos_rows(static_cast<std::size_t>(input.batch));
  for (int b = 0; b < input.batch; ++b) eos_rows[static_cast<std::size_t>(b)] = (b + 1) * input.len - 1;
  out.h = nn::gather_rows(out.states, eos_rows);
  return out;
}

std::vector<int> decoder_inputs(const TokenBatch& target, int eos_token) {
  std::vector<int> in(target.tokens.size(), corpus::kPadToken);
  for (int b = 0; b < target.batch; ++b) {
    for (int t = 0; t < target.len; ++t) {
      const auto i = static_cast<std::size_t>(b * target.len + t);
      const int prev = t > 0 ? target.tokens[i - 1] : corpus::kPadToken;
      const int cur = target.tokens[i];
      in[i] = (prev == corpus::kPadToken && cur != corpus::kPadToken) ? eos_token : prev;
    }
  }
  return in;
}

Var decode_states(const Pass& pass, Autoencoder& model, Domain domain, Var h,
                  const TokenBatch& target, const Trainable& trainable) {
  if (h.rows() != target.batch) throw InvariantError("decode: one latent per sequence required");
  auto& tables = model.tables(domain);
  TokenBatch in = target;
  in.tokens = decoder_inputs(target, tables.eos_token());
  for (std::size_t i = 0; i < in.tokens.size(); ++i)
    in.mask[i] = in.tokens[i] != corpus::kPadToken;
  Var x = pass.drop(tables.embed(pass, in.tokens, in.len, trainable.tables));
  return model.decoder(domain).forward(pass, x, in.shape(true), h, trainable.decoder);
}

Var decode_logits(const Pass& pass, Autoencoder& model, Domain domain, Var h,
                  const TokenBatch& target, const Trainable& trainable) {
  Var states = decode_states(pass, model, domain, h, target, trainable);
  return nn::matmul_nt(states, pass.bind(model.tables(domain).item_table, trainable.tables));
}

Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> reconstruction_candidates(
    const std::vector<int>& targets, int num_items, int n_sampled, Rng& rng) {
  if (n_sampled < 1) throw ConfigError("reconstruction: n_sampled must be >= 1");
  const bool full = n_sampled >= num_items - 1;
  const int cols = full ? num_items : n_sampled + 1;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cand(
      static_cast<Eigen::Index>(targets.size()), cols);
  std::vector<char> seen(static_cast<std::size_t>(num_items) + 1, 0);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const int target = targets[r];
    const auto row = static_cast<Eigen::Index>(r);
    cand(row, 0) = target;
    if (full) {
      int c = 1;
      for (int v = 1; v <= num_items; ++v)
        if (v != target) cand(row, c++) = v;
      continue;
    }
    seen[static_cast<std::size_t>(target)] = 1;
    for (int c = 1; c < cols;) {
      const int v = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_items)));
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      cand(row, c++) = v;
    }
    for (int c = 0; c < cols; ++c) seen[static_cast<std::size_t>(cand(row, c))] = 0;
  }
  return cand;
}

Var reconstruction_loss(const Pass& pass, Autoencoder& model, Domain domain, Var h,
                        const TokenBatch& target, int n_sampled, Rng& rng,
                        const Trainable& trainable) {
  auto& tables = model.tables(domain);
  std::vector<int> rows, targets;
  for (std::size_t i = 0; i < target.tokens.size(); ++i) {
    const int t = target.tokens[i];
    if (t >= 1 && t <= tables.num_items) {
      rows.push_back(static_cast<int>(i));
      targets.push_back(t);
    }
  }
  if (rows.empty()) throw InvariantError("reconstruction_loss: target has no items");
  Var states = decode_states(pass, model, domain, h, target, trainable);
  const auto cand = reconstruction_candidates(targets, tables.num_items, n_sampled, rng);
  return nn::candidate_softmax_xent(nn::gather_rows(states, rows),
                                    pass.bind(tables.item_table, trainable.tables), cand);
}

Matrix extract_gur(Autoencoder& model, Domain domain, const std::vector<std::vector<int>>& sequences,
                   int chunk) {
  Matrix out(static_cast<Eigen::Index>(sequences.size()), model.dims().d);
  const Trainable frozen{false, false, false};
  for (std::size_t start = 0; start < sequences.size(); start += static_cast<std::size_t>(chunk)) {
    const std::size_t end = std::min(sequences.size(), start + static_cast<std::size_t>(chunk));
    std::vector<std::vector<int>> part(sequences.begin() + static_cast<long>(start),
                                       sequences.begin() + static_cast<long>(end));
    nn::Tape tape;
    Pass pass{&tape, 0.0, nullptr};
    const auto batch = pad_batch(part, model.dims().max_len, model.tables(domain).num_items);
    const Encoded enc = encode(pass, model, domain, batch, frozen);
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start)) =
        enc.h.value();
  }
  return out;
}

}  // namespace guru::model
