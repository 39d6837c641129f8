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

#include <string>
#include <string_view>
#include <vector>

#include "featurebox/columnstore/column_batch.h"

namespace featurebox::viewpipe {

inline constexpr std::string_view kInstanceIdColumn = "instance_id";

struct JoinSpec {
  std::vector<std::string> keys;  // inner join on all keys
};

// Canonical key encoding: per key column, a kind tag byte then the value
// in big-endian (strings: big-endian u32 length then bytes). Rows with a
// null in any key column never match.
std::string canonical_key(const columnstore::ColumnBatch& batch,
                          const std::vector<size_t>& key_columns, size_t row);

// Hash inner join. Output columns are the left columns followed by the
// right non-key columns; rows are ordered by (key bytes, left row, right
// row). Throws SchemaError on missing keys, key kind mismatches or output
// name collisions.
columnstore::ColumnBatch join_views(const columnstore::ColumnBatch& left,
                                    const columnstore::ColumnBatch& right,
                                    const JoinSpec& spec);

// join_views on instance_id, with instance_id required to be unique on both
// sides.
columnstore::ColumnBatch merge_features(const columnstore::ColumnBatch& extracted,
                                        const columnstore::ColumnBatch& basic);

}  // namespace featurebox::viewpipe
