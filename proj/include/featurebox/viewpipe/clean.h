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
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "featurebox/columnstore/column_batch.h"
#include "featurebox/viewpipe/predicate.h"

namespace featurebox::viewpipe {

// Integer fills are accepted for Float32 columns; strings fill Utf8/Json.
using FillValue = std::variant<int64_t, double, std::string>;

struct JsonExtraction {
  std::string source;  // Json (or Utf8) column holding the document
  std::string path;    // dot path, e.g. "u.city"; numeric segments index arrays
  std::string output;
  columnstore::ColumnKind kind = columnstore::ColumnKind::kUtf8;
};

struct CleanPolicy {
  std::map<std::string, FillValue> fills;
  std::vector<JsonExtraction> json_extractions;
  std::optional<Predicate> filter;
};

struct CleanStats {
  size_t input_rows = 0;
  size_t malformed_rows = 0;  // dropped: extraction source was not valid JSON
  size_t filtered_rows = 0;   // dropped by the filter

  CleanStats& operator+=(const CleanStats& o) {
    input_rows += o.input_rows;
    malformed_rows += o.malformed_rows;
    filtered_rows += o.filtered_rows;
    return *this;
  }
};

struct CleanResult {
  columnstore::ColumnBatch batch;
  CleanStats stats;
};

// Extract JSON fields, fill nulls, then apply the filter. Survivor order is
// preserved. Re-running the same fill/extract policy on its own output is a
// no-op: an extraction whose output already exists with the same kind is
// recomputed in place.
//
// Throws ConfigError for fills whose kind does not match the column and
// SchemaError for unknown columns or extraction outputs that collide with a
// column of another kind.
CleanResult clean_views(const columnstore::ColumnBatch& batch, const CleanPolicy& policy);

// Column names that exist after cleaning `schema` with `policy`.
std::vector<columnstore::ColumnDef> cleaned_columns(const columnstore::ViewSchema& schema,
                                                    const CleanPolicy& policy);

}  // namespace featurebox::viewpipe
