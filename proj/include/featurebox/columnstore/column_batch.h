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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace featurebox::columnstore {

enum class ColumnKind : uint8_t {
  kInt64 = 1,
  kFloat32 = 2,
  kUtf8 = 3,
  kJson = 4,
};

std::string_view kind_name(ColumnKind kind);
std::optional<ColumnKind> parse_kind(std::string_view name);
inline bool is_var_length(ColumnKind kind) {
  return kind == ColumnKind::kUtf8 || kind == ColumnKind::kJson;
}

struct ColumnDef {
  std::string name;
  ColumnKind kind = ColumnKind::kInt64;

  bool operator==(const ColumnDef&) const = default;
};

struct ViewSchema {
  std::vector<ColumnDef> columns;
  std::vector<std::string> key_columns;
  uint64_t row_count = 0;

  // Throws SchemaError on empty/duplicate names or keys outside the columns.
  void validate() const;
  std::optional<size_t> index_of(std::string_view name) const;

  bool operator==(const ViewSchema&) const = default;
};

// One bit per row, LSB-first within each byte; a set bit marks a null slot.
class NullBitmap {
 public:
  NullBitmap() = default;
  explicit NullBitmap(size_t rows) : bytes_((rows + 7) / 8, 0), size_(rows) {}
  static NullBitmap from_bytes(std::span<const uint8_t> bytes, size_t rows);

  size_t size() const { return size_; }
  bool test(size_t row) const { return (bytes_[row >> 3] >> (row & 7)) & 1U; }
  void set(size_t row, bool is_null);
  void push_back(bool is_null);
  void reserve(size_t rows) { bytes_.reserve((rows + 7) / 8); }
  size_t count() const;
  const std::vector<uint8_t>& bytes() const { return bytes_; }

  bool operator==(const NullBitmap&) const = default;

 private:
  std::vector<uint8_t> bytes_;
  size_t size_ = 0;
};

// A typed column with a null bitmap. Null slots always hold a zero payload
// (0, 0.0f or the empty string); the bitmap is authoritative.
class Column {
 public:
  using Storage =
      std::variant<std::vector<int64_t>, std::vector<float>, std::vector<std::string>>;

  Column() = default;
  explicit Column(ColumnDef def);
  Column(std::string name, ColumnKind kind) : Column(ColumnDef{std::move(name), kind}) {}

  static Column of_int64(std::string name, std::vector<int64_t> values,
                         const std::vector<bool>& nulls = {});
  static Column of_float32(std::string name, std::vector<float> values,
                           const std::vector<bool>& nulls = {});
  static Column of_strings(std::string name, ColumnKind kind,
                           std::vector<std::string> values,
                           const std::vector<bool>& nulls = {});
  // Assembles a column from decoded parts; sizes must agree.
  static Column from_parts(ColumnDef def, Storage values, NullBitmap nulls);

  const ColumnDef& def() const { return def_; }
  const std::string& name() const { return def_.name; }
  ColumnKind kind() const { return def_.kind; }
  size_t size() const { return nulls_.size(); }
  void rename(std::string name) { def_.name = std::move(name); }

  bool is_null(size_t row) const { return nulls_.test(row); }
  const NullBitmap& nulls() const { return nulls_; }

  const std::vector<int64_t>& int64s() const;
  const std::vector<float>& float32s() const;
  const std::vector<std::string>& strings() const;

  void append_int64(int64_t v);
  void append_float32(float v);
  void append_string(std::string v);
  void append_null();
  void append_from(const Column& other, size_t row);

  // Replaces slot `row` with the given value and clears its null bit.
  void set_int64(size_t row, int64_t v);
  void set_float32(size_t row, float v);
  void set_string(size_t row, std::string v);

  void reserve(size_t rows);
  Column take(std::span<const size_t> rows) const;

  const Storage& storage() const { return values_; }

  // Null-aware equality: same def, same bitmap, equal payload at non-null
  // rows. Float32 payloads compare by bit pattern.
  friend bool operator==(const Column& a, const Column& b);

 private:
  ColumnDef def_;
  Storage values_;
  NullBitmap nulls_;
};

// In-memory image of a view: equally sized columns plus the join keys.
class ColumnBatch {
 public:
  ColumnBatch() = default;
  explicit ColumnBatch(std::vector<Column> columns,
                       std::vector<std::string> key_columns = {});
  // Zero-row batch with the given schema's columns.
  static ColumnBatch empty(const ViewSchema& schema);

  ViewSchema schema() const;
  size_t row_count() const { return rows_; }
  size_t column_count() const { return columns_.size(); }

  bool has_column(std::string_view name) const;
  std::optional<size_t> index_of(std::string_view name) const;
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);
  const Column& column(size_t index) const { return columns_.at(index); }
  Column& column(size_t index) { return columns_.at(index); }
  const std::vector<Column>& columns() const { return columns_; }

  const std::vector<std::string>& key_columns() const { return keys_; }
  void set_key_columns(std::vector<std::string> keys);

  // Appends a column; throws SchemaError on name collision or length mismatch.
  void add_column(Column column);
  void replace_column(Column column);

  ColumnBatch take(std::span<const size_t> rows) const;
  ColumnBatch slice(size_t begin, size_t end) const;
  ColumnBatch select(std::span<const std::string> names) const;

  // Concatenates batches with identical schemas.
  static ColumnBatch concat(std::span<const ColumnBatch> parts);

  friend bool operator==(const ColumnBatch& a, const ColumnBatch& b);

 private:
  std::vector<Column> columns_;
  std::vector<std::string> keys_;
  size_t rows_ = 0;
};

}  // namespace featurebox::columnstore
