/*
 * Copyright 2026 The FeatureBox Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featurebox/columnstore/column_batch.h"

namespace featurebox::columnstore {

// FBXC: an immutable, little-endian, uncompressed column file. The byte
// layout is documented in docs/fbxc_format.md.
inline constexpr char kFbxcMagic[4] = {'F', 'B', 'X', 'C'};
inline constexpr uint16_t kFbxcVersion = 1;
inline constexpr size_t kFooterBytes = 4;

struct Segment {
  uint64_t offset = 0;  // absolute file offset
  uint64_t length = 0;
  uint32_t crc32 = 0;

  bool operator==(const Segment&) const = default;
};

// Every column owns three segments. Fixed-width columns have an empty
// offsets segment.
struct ColumnSegments {
  Segment nulls;
  Segment offsets;
  Segment values;

  uint64_t total_bytes() const { return nulls.length + offsets.length + values.length; }
  bool operator==(const ColumnSegments&) const = default;
};

struct ViewFile {
  std::filesystem::path path;
  ViewSchema schema;
  uint32_t header_bytes = 0;
  std::vector<ColumnSegments> segments;  // parallel to schema.columns
  uint32_t body_crc32 = 0;
  uint64_t file_bytes = 0;

  uint64_t body_bytes() const { return file_bytes - header_bytes - kFooterBytes; }
};

struct ReadResult {
  ColumnBatch batch;
  uint64_t bytes_read = 0;
};

struct RowRange {
  uint64_t begin = 0;
  uint64_t end = 0;
};

// Writes `batch` to `destination` and returns the segment map. Throws
// SchemaError for zero-column batches and IoError on write failure.
ViewFile write_view(const ColumnBatch& batch, const std::filesystem::path& destination);

// Reads and validates the header. Errors: BadMagicError,
// UnsupportedVersionError, ChecksumError (header), TruncatedFileError.
ViewFile open_view(const std::filesystem::path& source);

ViewSchema schema_of(const std::filesystem::path& source);

// Projected read. The returned batch holds exactly `wanted` in schema
// order. bytes_read is the header plus the requested segments; with a row
// range, only the bytes covering those rows are read and per-segment
// checksums are not verified.
ReadResult read_columns(const std::filesystem::path& source,
                        std::span<const std::string> wanted,
                        std::optional<RowRange> rows = std::nullopt);

// Full-body scan against the footer checksum.
void verify_view(const std::filesystem::path& source);

// Keeps the file open for repeated ranged reads; bytes_read() accumulates
// the header once plus every segment byte fetched afterwards.
class ViewReader {
 public:
  ViewReader(const std::filesystem::path& source, std::vector<std::string> wanted);

  const ViewFile& file() const { return file_; }
  uint64_t row_count() const { return file_.schema.row_count; }
  const std::vector<std::string>& wanted() const { return wanted_; }

  ColumnBatch read(std::optional<RowRange> rows = std::nullopt);
  uint64_t bytes_read() const { return bytes_read_; }

 private:
  ViewFile file_;
  std::vector<std::string> wanted_;
  std::vector<size_t> indices_;
  std::ifstream in_;
  uint64_t bytes_read_ = 0;
};

}  // namespace featurebox::columnstore
