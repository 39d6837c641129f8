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

#include "featurebox/columnstore/column_batch.h"

#include <bit>
#include <cstring>
#include <unordered_set>

#include "featurebox/common/error.h"

namespace featurebox::columnstore {

std::string_view kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kInt64: return "int64";
    case ColumnKind::kFloat32: return "float32";
    case ColumnKind::kUtf8: return "utf8";
    case ColumnKind::kJson: return "json";
  }
  return "unknown";
}

std::optional<ColumnKind> parse_kind(std::string_view name) {
  if (name == "int64") return ColumnKind::kInt64;
  if (name == "float32") return ColumnKind::kFloat32;
  if (name == "utf8") return ColumnKind::kUtf8;
  if (name == "json") return ColumnKind::kJson;
  return std::nullopt;
}

void ViewSchema::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) throw SchemaError("column name must be non-empty");
    if (!seen.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
  }
  for (const auto& k : key_columns) {
    if (!seen.contains(k)) throw SchemaError("key column '" + k + "' is not a column");
  }
}

std::optional<size_t> ViewSchema::index_of(std::string_view name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

NullBitmap NullBitmap::from_bytes(std::span<const uint8_t> bytes, size_t rows) {
  if (bytes.size() != (rows + 7) / 8) throw FormatError("null bitmap size mismatch");
  NullBitmap out;
  out.bytes_.assign(bytes.begin(), bytes.end());
  out.size_ = rows;
  if (rows % 8 != 0 && !out.bytes_.empty()) {
    out.bytes_.back() &= static_cast<uint8_t>((1U << (rows % 8)) - 1);
  }
  return out;
}

void NullBitmap::set(size_t row, bool is_null) {
  uint8_t mask = static_cast<uint8_t>(1U << (row & 7));
  if (is_null) {
    bytes_[row >> 3] |= mask;
  } else {
    bytes_[row >> 3] &= static_cast<uint8_t>(~mask);
  }
}

void NullBitmap::push_back(bool is_null) {
  if ((size_ & 7) == 0) bytes_.push_back(0);
  ++size_;
  set(size_ - 1, is_null);
}

size_t NullBitmap::count() const {
  size_t n = 0;
  for (uint8_t b : bytes_) n += static_cast<size_t>(std::popcount(b));
  return n;
}

namespace {

Column::Storage storage_for(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kInt64: return std::vector<int64_t>{};
    case ColumnKind::kFloat32: return std::vector<float>{};
    case ColumnKind::kUtf8:
    case ColumnKind::kJson: return std::vector<std::string>{};
  }
  throw SchemaError("unknown column kind");
}

template <typename T>
std::vector<T>& get_or_throw(Column::Storage& s, const ColumnDef& def) {
  if (auto* v = std::get_if<std::vector<T>>(&s)) return *v;
  throw SchemaError("column '" + def.name + "' has kind " + std::string(kind_name(def.kind)));
}

template <typename T>
const std::vector<T>& get_or_throw(const Column::Storage& s, const ColumnDef& def) {
  if (const auto* v = std::get_if<std::vector<T>>(&s)) return *v;
  throw SchemaError("column '" + def.name + "' has kind " + std::string(kind_name(def.kind)));
}

template <typename T>
Column build(ColumnDef def, std::vector<T> values, const std::vector<bool>& nulls) {
  if (!nulls.empty() && nulls.size() != values.size()) {
    throw SchemaError("column '" + def.name + "': null mask length mismatch");
  }
  NullBitmap bitmap(values.size());
  for (size_t i = 0; i < nulls.size(); ++i) {
    if (nulls[i]) {
      bitmap.set(i, true);
      values[i] = T{};
    }
  }
  return Column::from_parts(std::move(def), std::move(values), std::move(bitmap));
}

}  // namespace

Column::Column(ColumnDef def) : def_(std::move(def)), values_(storage_for(def_.kind)) {}

Column Column::of_int64(std::string name, std::vector<int64_t> values,
                        const std::vector<bool>& nulls) {
  return build(ColumnDef{std::move(name), ColumnKind::kInt64}, std::move(values), nulls);
}

Column Column::of_float32(std::string name, std::vector<float> values,
                          const std::vector<bool>& nulls) {
  return build(ColumnDef{std::move(name), ColumnKind::kFloat32}, std::move(values), nulls);
}

Column Column::of_strings(std::string name, ColumnKind kind, std::vector<std::string> values,
                          const std::vector<bool>& nulls) {
  if (!is_var_length(kind)) throw SchemaError("of_strings requires a utf8 or json kind");
  return build(ColumnDef{std::move(name), kind}, std::move(values), nulls);
}

Column Column::from_parts(ColumnDef def, Storage values, NullBitmap nulls) {
  Column c(std::move(def));
  size_t n = std::visit([](const auto& v) { return v.size(); }, values);
  if (values.index() != c.values_.index()) {
    throw SchemaError("column '" + c.def_.name + "': storage does not match kind");
  }
  if (n != nulls.size()) throw SchemaError("column '" + c.def_.name + "': bitmap length mismatch");
  c.values_ = std::move(values);
  c.nulls_ = std::move(nulls);
  return c;
}

const std::vector<int64_t>& Column::int64s() const { return get_or_throw<int64_t>(values_, def_); }
const std::vector<float>& Column::float32s() const { return get_or_throw<float>(values_, def_); }
const std::vector<std::string>& Column::strings() const {
  return get_or_throw<std::string>(values_, def_);
}

void Column::append_int64(int64_t v) {
  get_or_throw<int64_t>(values_, def_).push_back(v);
  nulls_.push_back(false);
}

void Column::append_float32(float v) {
  get_or_throw<float>(values_, def_).push_back(v);
  nulls_.push_back(false);
}

void Column::append_string(std::string v) {
  get_or_throw<std::string>(values_, def_).push_back(std::move(v));
  nulls_.push_back(false);
}

void Column::append_null() {
  std::visit([](auto& v) { v.emplace_back(); }, values_);
  nulls_.push_back(true);
}

void Column::append_from(const Column& other, size_t row) {
  if (other.values_.index() != values_.index()) {
    throw SchemaError("append_from: kind mismatch on column '" + def_.name + "'");
  }
  if (other.is_null(row)) {
    append_null();
    return;
  }
  std::visit(
      [&](auto& dst) {
        using V = std::decay_t<decltype(dst)>;
        dst.push_back(std::get<V>(other.values_)[row]);
      },
      values_);
  nulls_.push_back(false);
}

void Column::set_int64(size_t row, int64_t v) {
  get_or_throw<int64_t>(values_, def_).at(row) = v;
  nulls_.set(row, false);
}

void Column::set_float32(size_t row, float v) {
  get_or_throw<float>(values_, def_).at(row) = v;
  nulls_.set(row, false);
}

void Column::set_string(size_t row, std::string v) {
  get_or_throw<std::string>(values_, def_).at(row) = std::move(v);
  nulls_.set(row, false);
}

void Column::reserve(size_t rows) {
  std::visit([rows](auto& v) { v.reserve(rows); }, values_);
  nulls_.reserve(rows);
}

Column Column::take(std::span<const size_t> rows) const {
  Column out(def_);
  out.reserve(rows.size());
  for (size_t r : rows) out.append_from(*this, r);
  return out;
}

bool operator==(const Column& a, const Column& b) {
  if (a.def_ != b.def_ || a.nulls_ != b.nulls_ || a.values_.index() != b.values_.index()) {
    return false;
  }
  const size_t n = a.size();
  return std::visit(
      [&](const auto& av) {
        using V = std::decay_t<decltype(av)>;
        const auto& bv = std::get<V>(b.values_);
        for (size_t i = 0; i < n; ++i) {
          if (a.is_null(i)) continue;
          if constexpr (std::is_same_v<V, std::vector<float>>) {
            if (std::bit_cast<uint32_t>(av[i]) != std::bit_cast<uint32_t>(bv[i])) return false;
          } else {
            if (av[i] != bv[i]) return false;
          }
        }
        return true;
      },
      a.values_);
}

ColumnBatch::ColumnBatch(std::vector<Column> columns, std::vector<std::string> key_columns) {
  for (auto& c : columns) add_column(std::move(c));
  set_key_columns(std::move(key_columns));
}

ColumnBatch ColumnBatch::empty(const ViewSchema& schema) {
  schema.validate();
  std::vector<Column> cols;
  cols.reserve(schema.columns.size());
  for (const auto& d : schema.columns) cols.emplace_back(d);
  return ColumnBatch(std::move(cols), schema.key_columns);
}

ViewSchema ColumnBatch::schema() const {
  ViewSchema s;
  s.columns.reserve(columns_.size());
  for (const auto& c : columns_) s.columns.push_back(c.def());
  s.key_columns = keys_;
  s.row_count = rows_;
  return s;
}

bool ColumnBatch::has_column(std::string_view name) const { return index_of(name).has_value(); }

std::optional<size_t> ColumnBatch::index_of(std::string_view name) const {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  return std::nullopt;
}

const Column& ColumnBatch::column(std::string_view name) const {
  if (auto i = index_of(name)) return columns_[*i];
  throw SchemaError("unknown column '" + std::string(name) + "'");
}

Column& ColumnBatch::column(std::string_view name) {
  if (auto i = index_of(name)) return columns_[*i];
  throw SchemaError("unknown column '" + std::string(name) + "'");
}

void ColumnBatch::set_key_columns(std::vector<std::string> keys) {
  for (const auto& k : keys) {
    if (!has_column(k)) throw SchemaError("key column '" + k + "' is not a column");
  }
  keys_ = std::move(keys);
}

void ColumnBatch::add_column(Column column) {
  if (column.name().empty()) throw SchemaError("column name must be non-empty");
  if (has_column(column.name())) {
    throw SchemaError("duplicate column name '" + column.name() + "'");
  }
  if (!columns_.empty() && column.size() != rows_) {
    throw SchemaError("column '" + column.name() + "' has " + std::to_string(column.size()) +
                      " rows, batch has " + std::to_string(rows_));
  }
  rows_ = column.size();
  columns_.push_back(std::move(column));
}

void ColumnBatch::replace_column(Column column) {
  auto i = index_of(column.name());
  if (!i) throw SchemaError("unknown column '" + column.name() + "'");
  if (column.size() != rows_) throw SchemaError("replacement column length mismatch");
  columns_[*i] = std::move(column);
}

ColumnBatch ColumnBatch::take(std::span<const size_t> rows) const {
  ColumnBatch out;
  for (const auto& c : columns_) out.add_column(c.take(rows));
  out.keys_ = keys_;
  out.rows_ = rows.size();
  return out;
}

ColumnBatch ColumnBatch::slice(size_t begin, size_t end) const {
  if (begin > end || end > rows_) throw SchemaError("slice out of range");
  std::vector<size_t> rows(end - begin);
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  return take(rows);
}

ColumnBatch ColumnBatch::select(std::span<const std::string> names) const {
  ColumnBatch out;
  for (const auto& n : names) out.add_column(column(n));
  out.rows_ = rows_;
  std::vector<std::string> keys;
  for (const auto& k : keys_) {
    if (out.has_column(k)) keys.push_back(k);
  }
  out.keys_ = std::move(keys);
  return out;
}

ColumnBatch ColumnBatch::concat(std::span<const ColumnBatch> parts) {
  if (parts.empty()) return {};
  const ViewSchema first = parts.front().schema();
  std::vector<Column> cols;
  size_t total = 0;
  for (const auto& p : parts) total += p.row_count();
  for (size_t c = 0; c < first.columns.size(); ++c) {
    Column col(first.columns[c]);
    col.reserve(total);
    for (const auto& p : parts) {
      if (p.column_count() != first.columns.size() || p.column(c).def() != first.columns[c]) {
        throw SchemaError("concat: schema mismatch");
      }
      const Column& src = p.column(c);
      for (size_t r = 0; r < src.size(); ++r) col.append_from(src, r);
    }
    cols.push_back(std::move(col));
  }
  return ColumnBatch(std::move(cols), first.key_columns);
}

bool operator==(const ColumnBatch& a, const ColumnBatch& b) {
  return a.rows_ == b.rows_ && a.keys_ == b.keys_ && a.columns_ == b.columns_;
}

}  // namespace featurebox::columnstore
