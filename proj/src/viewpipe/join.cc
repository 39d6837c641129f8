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

#include "featurebox/viewpipe/join.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "featurebox/common/error.h"

namespace featurebox::viewpipe {

using columnstore::Column;
using columnstore::ColumnBatch;
using columnstore::ColumnKind;

namespace {

void put_be(std::string& out, uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::vector<size_t> key_indices(const ColumnBatch& batch, const JoinSpec& spec, const char* side) {
  std::vector<size_t> idx;
  for (const auto& k : spec.keys) {
    auto i = batch.index_of(k);
    if (!i) throw SchemaError(std::string(side) + " input has no key column '" + k + "'");
    idx.push_back(*i);
  }
  return idx;
}

bool any_null(const ColumnBatch& batch, const std::vector<size_t>& keys, size_t row) {
  for (size_t k : keys) {
    if (batch.column(k).is_null(row)) return true;
  }
  return false;
}

struct Match {
  std::string key;
  size_t left;
  size_t right;
};

}  // namespace

std::string canonical_key(const ColumnBatch& batch, const std::vector<size_t>& key_columns,
                          size_t row) {
  std::string out;
  for (size_t k : key_columns) {
    const Column& col = batch.column(k);
    out.push_back(static_cast<char>(col.kind()));
    switch (col.kind()) {
      case ColumnKind::kInt64:
        put_be(out, static_cast<uint64_t>(col.int64s()[row]), 8);
        break;
      case ColumnKind::kFloat32:
        put_be(out, std::bit_cast<uint32_t>(col.float32s()[row]), 4);
        break;
      case ColumnKind::kUtf8:
      case ColumnKind::kJson: {
        const auto& s = col.strings()[row];
        put_be(out, s.size(), 4);
        out += s;
        break;
      }
    }
  }
  return out;
}

ColumnBatch join_views(const ColumnBatch& left, const ColumnBatch& right, const JoinSpec& spec) {
  if (spec.keys.empty()) throw SchemaError("join spec has no keys");
  const auto lk = key_indices(left, spec, "left");
  const auto rk = key_indices(right, spec, "right");
  for (size_t i = 0; i < lk.size(); ++i) {
    if (left.column(lk[i]).kind() != right.column(rk[i]).kind()) {
      throw SchemaError("join key '" + spec.keys[i] + "' has different kinds on each side");
    }
  }

  // Output schema: left ++ right minus keys.
  std::unordered_set<std::string> key_set(spec.keys.begin(), spec.keys.end());
  std::vector<size_t> right_payload;
  for (size_t c = 0; c < right.column_count(); ++c) {
    const auto& name = right.column(c).name();
    if (key_set.contains(name)) continue;
    if (left.has_column(name)) {
      throw SchemaError("join output would contain column '" + name + "' twice");
    }
    right_payload.push_back(c);
  }

  std::unordered_map<std::string, std::vector<size_t>> build;
  build.reserve(right.row_count());
  for (size_t r = 0; r < right.row_count(); ++r) {
    if (any_null(right, rk, r)) continue;
    build[canonical_key(right, rk, r)].push_back(r);
  }

  std::vector<Match> matches;
  for (size_t l = 0; l < left.row_count(); ++l) {
    if (any_null(left, lk, l)) continue;
    auto key = canonical_key(left, lk, l);
    auto it = build.find(key);
    if (it == build.end()) continue;
    for (size_t r : it->second) matches.push_back({key, l, r});
  }
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.left != b.left) return a.left < b.left;
    return a.right < b.right;
  });

  std::vector<size_t> lrows;
  std::vector<size_t> rrows;
  lrows.reserve(matches.size());
  rrows.reserve(matches.size());
  for (const auto& m : matches) {
    lrows.push_back(m.left);
    rrows.push_back(m.right);
  }

  ColumnBatch out;
  for (const auto& c : left.columns()) out.add_column(c.take(lrows));
  for (size_t c : right_payload) out.add_column(right.column(c).take(rrows));
  out.set_key_columns(spec.keys);
  return out;
}

namespace {

void require_unique_ids(const ColumnBatch& batch, const char* side) {
  auto idx = batch.index_of(kInstanceIdColumn);
  if (!idx) throw SchemaError(std::string(side) + " features have no instance_id column");
  const Column& ids = batch.column(*idx);
  if (ids.kind() != ColumnKind::kInt64) throw SchemaError("instance_id must be an int64 column");
  std::unordered_set<int64_t> seen;
  seen.reserve(ids.size());
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids.is_null(r)) continue;
    if (!seen.insert(ids.int64s()[r]).second) {
      throw SchemaError(std::string(side) + " features repeat instance_id " +
                        std::to_string(static_cast<uint64_t>(ids.int64s()[r])));
    }
  }
}

}  // namespace

ColumnBatch merge_features(const ColumnBatch& extracted, const ColumnBatch& basic) {
  require_unique_ids(extracted, "extracted");
  require_unique_ids(basic, "basic");
  return join_views(extracted, basic, JoinSpec{{std::string(kInstanceIdColumn)}});
}

}  // namespace featurebox::viewpipe
