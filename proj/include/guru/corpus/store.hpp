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

#include <filesystem>
#include <json.hpp>
#include <string>

#include "guru/corpus/types.hpp"

namespace guru::corpus {

/// On-disk dataset layout:
///
///   <dir>/manifest.json
///   <dir>/corpus_a/{sequences.tsv, items.tsv}
///   <dir>/corpus_b/{sequences.tsv, items.tsv}
///   <dir>/overlap.tsv          a_index <TAB> b_index <TAB> raw user id
///   <dir>/splits/{a.tsv, b.tsv} user_index <TAB> train items <TAB> valid <TAB> test
///
/// sequences.tsv lines are `raw_user_id <TAB> space-separated item indices`
/// in user-index order; items.tsv lines are
/// `item_index <TAB> raw_item_id <TAB> training_frequency`.
///
/// The manifest records the producing command's parameters and seed, the
/// dataset counts, a content hash per file and `manifest_hash` (hash of the
/// manifest without that field). Loading re-hashes every file and refuses
/// a mismatch.
struct StoredDataset {
  CrossDomainDataset data;
  nlohmann::json manifest;
  std::string manifest_hash;
};

/// `provenance` is stored verbatim under "provenance" (command, params,
/// seed). Returns the written manifest.
nlohmann::json save_dataset(const std::filesystem::path& dir, const CrossDomainDataset& data,
                            const nlohmann::json& provenance);

/// Throws ArtifactMissingError when the manifest is absent and InputError on
/// any hash or format mismatch.
StoredDataset load_dataset(const std::filesystem::path& dir);

nlohmann::json dataset_counts(const CrossDomainDataset& data);

}  // namespace guru::corpus
