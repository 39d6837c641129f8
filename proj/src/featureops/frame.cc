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

#include "featurebox/featureops/frame.h"

#include <charconv>

#include "featurebox/common/error.h"

namespace featurebox::featureops {

using columnstore::Column;
using columnstore::ColumnKind;

std::string_view frame_kind_name(FrameKind kind) {
  switch (kind) {
    case FrameKind::kInt64: return "int64";
    case FrameKind::kFloat32: return "float32";
    case FrameKind::kText: return "text";
    case FrameKind::kTokens: return "tokens";
    case FrameKind::kSigns: return "signs";
  }
  return "unknown";
}

size_t FrameColumn::rows() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

uint64_t FrameColumn::byte_size() const {
  return std::visit(
      [](const auto& v) -> uint64_t {
        using V = std::decay_t<decltype(v)>;
        uint64_t n = 0;
        if constexpr (std::is_same_v<V, std::vector<std::string>>) {
          for (const auto& s : v) n += s.size() + sizeof(uint32_t);
        } else if constexpr (std::is_same_v<V, std::vector<std::vector<std::string>>>) {
          for (const auto& l : v) {
            n += sizeof(uint32_t);
            for (const auto& s : l) n += s.size() + sizeof(uint32_t);
          }
        } else if constexpr (std::is_same_v<V, std::vector<std::vector<FeatureSign>>>) {
          for (const auto& l : v) n += sizeof(uint32_t) + l.size() * (sizeof(uint64_t) + sizeof(uint16_t));
        } else {
          n = v.size() * sizeof(typename V::value_type);
        }
        return n;
      },
      data);
}

FeatureFrame FeatureFrame::from_batch(const columnstore::ColumnBatch& batch) {
  FeatureFrame f(batch.row_count());
  for (const auto& c : batch.columns()) {
    FrameColumn fc;
    switch (c.kind()) {
      case ColumnKind::kInt64: fc.data = c.int64s(); break;
      case ColumnKind::kFloat32: fc.data = c.float32s(); break;
      case ColumnKind::kUtf8:
      case ColumnKind::kJson: fc.data = c.strings(); break;
    }
    if (c.nulls().count() > 0) {
      fc.nulls.resize(c.size());
      for (size_t r = 0; r < c.size(); ++r) fc.nulls[r] = c.is_null(r);
    }
    fc.written = true;
    f.cols_[c.name()] = std::move(fc);
  }
  return f;
}

bool FeatureFrame::contains(std::string_view name) const { return cols_.find(name) != cols_.end(); }

const FrameColumn& FeatureFrame::at(std::string_view name) const {
  auto it = cols_.find(name);
  if (it == cols_.end()) throw SchemaError("frame has no column '" + std::string(name) + "'");
  return it->second;
}

FrameColumn& FeatureFrame::at(std::string_view name) {
  auto it = cols_.find(name);
  if (it == cols_.end()) throw SchemaError("frame has no column '" + std::string(name) + "'");
  return it->second;
}

void FeatureFrame::put(const std::string& name, FrameColumn column) {
  if (column.rows() != rows_) throw SchemaError("frame column '" + name + "' has wrong row count");
  cols_[name] = std::move(column);
}

void FeatureFrame::erase(std::string_view name) {
  auto it = cols_.find(name);
  if (it != cols_.end()) cols_.erase(it);
}

std::vector<std::string> FeatureFrame::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : cols_) out.push_back(k);
  return out;
}

Column FeatureFrame::to_column(const std::string& name) const {
  const FrameColumn& fc = at(name);
  std::vector<bool> nulls = fc.nulls;
  switch (fc.kind()) {
    case FrameKind::kInt64: return Column::of_int64(name, std::get<0>(fc.data), nulls);
    case FrameKind::kFloat32: return Column::of_float32(name, std::get<1>(fc.data), nulls);
    case FrameKind::kText: return Column::of_strings(name, ColumnKind::kUtf8, std::get<2>(fc.data), nulls);
    case FrameKind::kSigns: {
      const auto& lists = std::get<4>(fc.data);
      std::vector<std::string> text;
      text.reserve(lists.size());
      for (const auto& l : lists) text.push_back(encode_sign_list(l));
      return Column::of_strings(name, ColumnKind::kUtf8, std::move(text));
    }
    case FrameKind::kTokens: break;
  }
  throw SchemaError("frame column '" + name + "' holds token lists, which cannot be exported");
}

std::string value_text(const FrameColumn& column, size_t row) {
  switch (column.kind()) {
    case FrameKind::kInt64: return std::to_string(std::get<0>(column.data)[row]);
    case FrameKind::kFloat32: {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof(buf), std::get<1>(column.data)[row]);
      return std::string(buf, r.ptr);
    }
    case FrameKind::kText: return std::get<2>(column.data)[row];
    default: break;
  }
  throw SchemaError("column of kind " + std::string(frame_kind_name(column.kind())) +
                    " has no scalar value text");
}

}  // namespace featurebox::featureops
