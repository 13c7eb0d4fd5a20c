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
#include <map>
#include <string>

#include "guru/nn/parameter.hpp"

namespace guru::trainer {

/// Binary checkpoint container:
///
///   "GURUCKPT" magic, u64 header length, JSON header, raw doubles
///
/// The header lists every tensor (name, rows, cols) in payload order and
/// carries arbitrary metadata under "meta". Doubles are stored in native
/// little-endian order, row-major.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, nn::Matrix> tensors;
};

/// Writes atomically (temporary file, then rename).
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ArtifactMissingError when the file does not exist and InputError
/// when it is truncated or malformed.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace guru::trainer
