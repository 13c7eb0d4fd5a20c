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
#include <vector>

#include "guru/corpus/split.hpp"
#include "guru/corpus/types.hpp"
#include "guru/model/transformer.hpp"

namespace guru::model {

using corpus::Domain;

struct ModelDims {
  int max_len = 50;  // N; sequences are N + 1 tokens with [eos]
  int d = 64;
  int layers = 3;
  int heads = 2;
  int d_ff = 512;
  double dropout = 0.1;
};

/// `batch` token sequences of equal length stacked row-wise.
struct TokenBatch {
  int batch = 0;
  int len = 0;
  std::vector<int> tokens;
  std::vector<std::uint8_t> mask;

  SeqShape shape(bool causal) const { return {batch, len, causal, mask}; }
};

TokenBatch pack(const std::vector<corpus::PaddedSequence>& seqs);
/// pad_or_truncate on every sequence, then pack.
TokenBatch pad_batch(const std::vector<std::vector<int>>& seqs, int max_len, int num_items);

/// Parameter groups that receive gradients in a pass.
struct Trainable {
  bool tables = true;
  bool encoder = true;
  bool decoder = true;
};

/// Sequence autoencoder: per-domain embedding tables, one encoder shared
/// by both domains, and one causal decoder per domain.
class Autoencoder {
 public:
  Autoencoder(const ModelDims& dims, int num_items_a, int num_items_b);

  const ModelDims& dims() const { return dims_; }
  EmbeddingTables& tables(Domain d) { return tables_[index(d)]; }
  const EmbeddingTables& tables(Domain d) const { return tables_[index(d)]; }
  TransformerStack& encoder() { return encoder_; }
  TransformerStack& decoder(Domain d) { return decoders_[index(d)]; }

  void init(Rng& rng);
  ParameterList parameters();
  ParameterList table_parameters(Domain d);
  ParameterList encoder_parameters();
  ParameterList decoder_parameters(Domain d);

 private:
  static std::size_t index(Domain d) { return d == Domain::A ? 0 : 1; }

  ModelDims dims_;
  std::array<EmbeddingTables, 2> tables_;
  TransformerStack encoder_;
  std::array<TransformerStack, 2> decoders_;
};

struct Encoded {
  Var states;  // batch·len × d, one latent per position
  Var h;       // batch × d, the latent at the [eos] slot
};

/// Bidirectional encoding with [pad] keys masked. Throws InvariantError if
/// a sequence has no content.
Encoded encode(const Pass& pass, Autoencoder& model, Domain domain, const TokenBatch& input,
               const Trainable& trainable);

/// Teacher-forced decoder inputs: the target shifted right by one, with
/// [eos] standing in as the begin-of-sequence token before the first item.
std::vector<int> decoder_inputs(const TokenBatch& target, int eos_token);

/// Decoder states (batch·len × d) for reconstructing `target` from `h`.
Var decode_states(const Pass& pass, Autoencoder& model, Domain domain, Var h,
                  const TokenBatch& target, const Trainable& trainable);

/// Tied-weight scores of every decoder state against every item_table row
/// (batch·len × (|V| + 2)).
Var decode_logits(const Pass& pass, Autoencoder& model, Domain domain, Var h,
                  const TokenBatch& target, const Trainable& trainable);

/// Mean cross-entropy over the item positions of `target`, each restricted
/// to the target item plus `n_sampled` distinct uniform negatives drawn
/// from the other items. With n_sampled >= |V| − 1 every other item is a
/// negative (full softmax) and no randomness is used.
Var reconstruction_loss(const Pass& pass, Autoencoder& model, Domain domain, Var h,
                        const TokenBatch& target, int n_sampled, Rng& rng,
                        const Trainable& trainable);

/// Candidate rows for reconstruction_loss: target in column 0.
Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> reconstruction_candidates(
    const std::vector<int>& targets, int num_items, int n_sampled, Rng& rng);

/// GUR of each sequence (rows follow `sequences`): the [eos] latent of the
/// padded sequence, evaluated without dropout.
Matrix extract_gur(Autoencoder& model, Domain domain, const std::vector<std::vector<int>>& sequences,
                   int chunk = 256);

}  // namespace guru::model
