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
#include <istream>
#include <string>
#include <vector>

#include "guru/corpus/types.hpp"

namespace guru::corpus {

enum class RecordFormat { tsv, jsonl };

/// Throws ConfigError on an unknown tag.
RecordFormat parse_record_format(const std::string& tag);

struct IngestResult {
  std::vector<Interaction> records;
  std::size_t skipped = 0;
};

/// Reads records in stream order.
///
/// tsv:   user <TAB> item <TAB> timestamp [<TAB> rating]
/// jsonl: {"user": ..., "item": ..., "ts": ..., "rating": ...}
///        (Amazon review field names reviewerID / asin / unixReviewTime /
///        overall are accepted as aliases)
///
/// Lines that cannot be parsed, or whose rating falls outside 1..5, are
/// skipped and counted. Blank lines are ignored.
IngestResult ingest(std::istream& in, RecordFormat format);

/// Throws InputError if the file cannot be opened.
IngestResult ingest_file(const std::filesystem::path& path, RecordFormat format);

}  // namespace guru::corpus
