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
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "featurebox/columnstore/column_batch.h"
#include "featurebox/featureops/functions.h"

namespace featurebox::featureops {

enum class FrameKind { kInt64, kFloat32, kText, kTokens, kSigns };

std::string_view frame_kind_name(FrameKind kind);

using FrameData = std::variant<std::vector<int64_t>, std::vector<float>, std::vector<std::string>,
                               std::vector<std::vector<std::string>>,
                               std::vector<std::vector<FeatureSign>>>;

// A column of the extraction working table. List kinds represent a null
// row as an empty list.
struct FrameColumn {
  FrameData data;
  std::vector<bool> nulls;  // empty when no row is null

  // Version stamp maintained by the executor: which node wrote the column,
  // in which layer, and whether the device side can read it yet. Frame
  // inputs carry layer 0 and are visible everywhere.
  std::string producer;
  int layer = 0;
  bool device_visible = true;
  bool written = false;

  FrameKind kind() const { return static_cast<FrameKind>(data.index()); }
  size_t rows() const;
  bool is_null(size_t row) const { return !nulls.empty() && nulls[row]; }
  uint64_t byte_size() const;
};

// Row-aligned named columns. Slots are created before a run so concurrent
// writers in one layer only touch their own slot.
class FeatureFrame {
 public:
  explicit FeatureFrame(size_t rows = 0) : rows_(rows) {}
  static FeatureFrame from_batch(const columnstore::ColumnBatch& batch);

  size_t rows() const { return rows_; }
  bool contains(std::string_view name) const;
  const FrameColumn& at(std::string_view name) const;
  FrameColumn& at(std::string_view name);
  FrameColumn& slot(const std::string& name) { return cols_[name]; }
  void put(const std::string& name, FrameColumn column);
  void erase(std::string_view name);
  std::vector<std::string> names() const;

  // Int64/Float32 export as themselves, Text as Utf8, sign lists as Utf8 in
  // encode_sign_list form. Token lists are not exportable.
  columnstore::Column to_column(const std::string& name) const;

 private:
  size_t rows_;
  std::map<std::string, FrameColumn, std::less<>> cols_;
};

// Canonical bytes a scalar cell contributes to a hash: decimal for Int64,
// shortest round-trip text for Float32, raw bytes for Text.
std::string value_text(const FrameColumn& column, size_t row);

}  // namespace featurebox::featureops
