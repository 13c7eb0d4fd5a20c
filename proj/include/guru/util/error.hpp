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

#include <stdexcept>
#include <string>

namespace guru {

// Error taxonomy shared by every module. The CLI maps these onto its
// stable exit codes (see cli/commands.hpp).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed external input (files, records).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown enum tag.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented invariant was violated by the caller or by data.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Unknown user, item or domain.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Preprocessing filtered the corpus down to nothing.
class CorpusDegenerateError : public Error {
 public:
  CorpusDegenerateError(const std::string& stage)
      : Error("corpus degenerate: empty after stage '" + stage + "'"),
        stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// A required artifact (checkpoint, manifest) does not exist.
class ArtifactMissingError : public Error {
 public:
  using Error::Error;
};

/// Training produced a NaN or infinite loss.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

}  // namespace guru
