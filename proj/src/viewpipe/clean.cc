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

#include "featurebox/viewpipe/clean.h"

#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "featurebox/common/error.h"

namespace featurebox::viewpipe {

using columnstore::Column;
using columnstore::ColumnBatch;
using columnstore::ColumnDef;
using columnstore::ColumnKind;
using columnstore::ViewSchema;
using nlohmann::json;

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (;;) {
    size_t dot = path.find('.', start);
    parts.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts;
}

const json* walk(const json& doc, const std::vector<std::string>& path) {
  const json* cur = &doc;
  for (const auto& seg : path) {
    if (cur->is_object()) {
      auto it = cur->find(seg);
      if (it == cur->end()) return nullptr;
      cur = &*it;
    } else if (cur->is_array()) {
      size_t idx = 0;
      auto [p, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
      if (ec != std::errc() || p != seg.data() + seg.size() || idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else {
      return nullptr;
    }
  }
  return cur;
}

// Appends the converted value, or null when absent or not representable.
void append_extracted(Column& out, const json* v) {
  if (v == nullptr || v->is_null()) {
    out.append_null();
    return;
  }
  switch (out.kind()) {
    case ColumnKind::kInt64:
      if (v->is_number_integer()) {
        if (v->is_number_unsigned() &&
            v->get<uint64_t>() > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())) {
          out.append_null();
        } else {
          out.append_int64(v->get<int64_t>());
        }
      } else if (v->is_boolean()) {
        out.append_int64(v->get<bool>() ? 1 : 0);
      } else {
        out.append_null();
      }
      return;
    case ColumnKind::kFloat32:
      if (v->is_number()) out.append_float32(v->get<float>());
      else out.append_null();
      return;
    case ColumnKind::kUtf8:
      out.append_string(v->is_string() ? v->get<std::string>() : v->dump());
      return;
    case ColumnKind::kJson:
      out.append_string(v->dump());
      return;
  }
}

void check_fill_kind(const std::string& column, ColumnKind kind, const FillValue& fill) {
  bool ok = false;
  switch (kind) {
    case ColumnKind::kInt64: ok = std::holds_alternative<int64_t>(fill); break;
    case ColumnKind::kFloat32: ok = !std::holds_alternative<std::string>(fill); break;
    case ColumnKind::kUtf8:
    case ColumnKind::kJson: ok = std::holds_alternative<std::string>(fill); break;
  }
  if (!ok) {
    throw ConfigError("fill value for column '" + column + "' does not match its kind " +
                      std::string(columnstore::kind_name(kind)));
  }
}

void apply_fill(Column& col, const FillValue& fill) {
  for (size_t r = 0; r < col.size(); ++r) {
    if (!col.is_null(r)) continue;
    switch (col.kind()) {
      case ColumnKind::kInt64: col.set_int64(r, std::get<int64_t>(fill)); break;
      case ColumnKind::kFloat32:
        col.set_float32(r, std::holds_alternative<int64_t>(fill)
                               ? static_cast<float>(std::get<int64_t>(fill))
                               : static_cast<float>(std::get<double>(fill)));
        break;
      case ColumnKind::kUtf8:
      case ColumnKind::kJson: col.set_string(r, std::get<std::string>(fill)); break;
    }
  }
}

}  // namespace

std::vector<ColumnDef> cleaned_columns(const ViewSchema& schema, const CleanPolicy& policy) {
  std::vector<ColumnDef> cols = schema.columns;
  for (size_t i = 0; i < policy.json_extractions.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (policy.json_extractions[i].output == policy.json_extractions[j].output) {
        throw SchemaError("json extraction output '" + policy.json_extractions[i].output +
                          "' is declared twice");
      }
    }
  }
  for (const auto& ex : policy.json_extractions) {
    auto src = schema.index_of(ex.source);
    if (!src) throw SchemaError("json extraction source '" + ex.source + "' is not a column");
    if (!columnstore::is_var_length(schema.columns[*src].kind)) {
      throw SchemaError("json extraction source '" + ex.source + "' is not a text column");
    }
    bool found = false;
    for (const auto& c : cols) {
      if (c.name != ex.output) continue;
      if (c.kind != ex.kind) {
        throw SchemaError("json extraction output '" + ex.output +
                          "' collides with an existing column");
      }
      found = true;
    }
    if (!found) cols.push_back({ex.output, ex.kind});
  }
  for (const auto& [name, fill] : policy.fills) {
    const ColumnDef* def = nullptr;
    for (const auto& c : cols) {
      if (c.name == name) def = &c;
    }
    if (def == nullptr) throw SchemaError("fill references unknown column '" + name + "'");
    check_fill_kind(name, def->kind, fill);
  }
  return cols;
}

CleanResult clean_views(const ColumnBatch& batch, const CleanPolicy& policy) {
  const ViewSchema schema = batch.schema();
  const auto out_defs = cleaned_columns(schema, policy);
  const size_t rows = batch.row_count();

  CleanResult result;
  result.stats.input_rows = rows;

  // Parse each distinct source column once per row.
  std::vector<std::string> sources;
  for (const auto& ex : policy.json_extractions) {
    if (std::find(sources.begin(), sources.end(), ex.source) == sources.end()) {
      sources.push_back(ex.source);
    }
  }
  std::vector<std::vector<std::vector<std::string>>> paths(sources.size());
  std::vector<Column> extracted;
  std::vector<size_t> extraction_source;
  for (const auto& ex : policy.json_extractions) {
    size_t s = static_cast<size_t>(std::find(sources.begin(), sources.end(), ex.source) -
                                   sources.begin());
    extraction_source.push_back(s);
    extracted.emplace_back(ColumnDef{ex.output, ex.kind});
    extracted.back().reserve(rows);
  }
  std::vector<std::vector<std::string>> split_paths;
  for (const auto& ex : policy.json_extractions) split_paths.push_back(split_path(ex.path));

  std::vector<size_t> keep;
  keep.reserve(rows);
  std::vector<json> docs(sources.size());
  std::vector<bool> present(sources.size());
  for (size_t r = 0; r < rows; ++r) {
    bool malformed = false;
    for (size_t s = 0; s < sources.size() && !malformed; ++s) {
      const Column& src = batch.column(sources[s]);
      present[s] = !src.is_null(r);
      if (!present[s]) continue;
      docs[s] = json::parse(src.strings()[r], nullptr, /*allow_exceptions=*/false);
      malformed = docs[s].is_discarded();
    }
    if (malformed) {
      ++result.stats.malformed_rows;
      continue;
    }
    keep.push_back(r);
    for (size_t e = 0; e < extracted.size(); ++e) {
      size_t s = extraction_source[e];
      append_extracted(extracted[e], present[s] ? walk(docs[s], split_paths[e]) : nullptr);
    }
  }

  ColumnBatch out;
  for (const auto& def : out_defs) {
    bool from_extraction = false;
    for (auto& col : extracted) {
      if (col.name() == def.name) {
        out.add_column(col);
        from_extraction = true;
      }
    }
    if (!from_extraction) out.add_column(batch.column(def.name).take(keep));
  }
  out.set_key_columns(batch.key_columns());

  for (const auto& [name, fill] : policy.fills) apply_fill(out.column(name), fill);

  if (policy.filter) {
    auto pass = policy.filter->evaluate(out);
    std::vector<size_t> survivors;
    survivors.reserve(pass.size());
    for (size_t i = 0; i < pass.size(); ++i) {
      if (pass[i]) survivors.push_back(i);
    }
    result.stats.filtered_rows = out.row_count() - survivors.size();
    if (survivors.size() != out.row_count()) out = out.take(survivors);
  }
  result.batch = std::move(out);
  return result;
}

}  // namespace featurebox::viewpipe
