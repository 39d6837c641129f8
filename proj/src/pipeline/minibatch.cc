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

#include "featurebox/pipeline/minibatch.h"

#include <algorithm>
#include <unordered_set>

#include "featurebox/common/error.h"
#include "featurebox/common/hash.h"
#include "featurebox/viewpipe/join.h"

namespace featurebox::pipeline {

using columnstore::Column;
using columnstore::ColumnBatch;
using columnstore::ColumnKind;
using featureops::FeatureSign;

namespace {

const Column& column_of(const ColumnBatch& batch, const std::string& name, ColumnKind kind) {
  if (!batch.has_column(name)) throw SchemaError("merged rows have no column '" + name + "'");
  const Column& c = batch.column(name);
  if (c.kind() != kind) {
    throw SchemaError("column '" + name + "' is " + std::string(kind_name(c.kind())) + ", expected " +
                      std::string(kind_name(kind)));
  }
  return c;
}

}  // namespace

MiniBatch emit_minibatch(const ColumnBatch& merged, const std::string& label_column,
                         const FeatureLayout& layout) {
  const Column& ids = column_of(merged, std::string(viewpipe::kInstanceIdColumn), ColumnKind::kInt64);
  const Column& labels = column_of(merged, label_column, ColumnKind::kInt64);
  std::vector<const Column*> lists;
  for (const auto& name : layout.sign_lists) lists.push_back(&column_of(merged, name, ColumnKind::kUtf8));
  std::vector<const Column*> basic;
  for (const auto& f : layout.basic) basic.push_back(&column_of(merged, f.column, ColumnKind::kInt64));

  MiniBatch out;
  const size_t n = merged.row_count();
  out.instance_ids.reserve(n);
  out.labels.reserve(n);
  out.features.resize(n);
  for (size_t r = 0; r < n; ++r) {
    if (ids.is_null(r)) throw SchemaError("null instance_id in row " + std::to_string(r));
    if (labels.is_null(r) || (labels.int64s()[r] != 0 && labels.int64s()[r] != 1)) {
      throw SchemaError("label in row " + std::to_string(r) + " is not 0 or 1");
    }
    out.instance_ids.push_back(static_cast<uint64_t>(ids.int64s()[r]));
    out.labels.push_back(static_cast<uint8_t>(labels.int64s()[r]));
    auto& signs = out.features[r];
    for (const Column* c : lists) {
      if (c->is_null(r)) continue;
      auto decoded = featureops::decode_sign_list(c->strings()[r]);
      signs.insert(signs.end(), decoded.begin(), decoded.end());
    }
    for (size_t i = 0; i < basic.size(); ++i) {
      if (basic[i]->is_null(r)) continue;
      signs.push_back({layout.basic[i].slot, static_cast<uint64_t>(basic[i]->int64s()[r])});
    }
    std::sort(signs.begin(), signs.end());
    signs.erase(std::unique(signs.begin(), signs.end()), signs.end());
  }
  return out;
}

uint64_t instance_digest(uint64_t instance_id, uint8_t label, const std::vector<FeatureSign>& signs) {
  Fnv1a64 h;
  h.update_u64_le(instance_id).update_byte(label);
  for (const auto& s : signs) {
    h.update_byte(static_cast<uint8_t>(s.slot >> 8)).update_byte(static_cast<uint8_t>(s.slot & 0xFF));
    h.update_u64_le(s.sign);
  }
  return h.digest();
}

void TrainingSink::consume(const MiniBatch& batch) {
  if (batch.labels.size() != batch.size() || batch.features.size() != batch.size()) {
    throw Error("mini-batch fields have different lengths");
  }
  std::unordered_set<uint64_t> ids;
  SinkStats delta;
  for (size_t i = 0; i < batch.size(); ++i) {
    if (!ids.insert(batch.instance_ids[i]).second) {
      throw Error("mini-batch repeats instance " + std::to_string(batch.instance_ids[i]));
    }
    if (batch.labels[i] > 1) throw Error("mini-batch label is not 0 or 1");
    const auto& signs = batch.features[i];
    for (size_t k = 1; k < signs.size(); ++k) {
      if (!(signs[k - 1] < signs[k])) throw Error("mini-batch signs are not sorted and unique");
    }
    delta.signs += signs.size();
    delta.digest ^= instance_digest(batch.instance_ids[i], batch.labels[i], signs);
  }
  stats_.batches += 1;
  stats_.instances += batch.size();
  stats_.signs += delta.signs;
  stats_.digest ^= delta.digest;
}

std::vector<ColumnBatch> Rebatcher::add(ColumnBatch rows) {
  std::vector<ColumnBatch> out;
  if (rows.row_count() == 0) return out;
  pending_rows_ += rows.row_count();
  pending_.push_back(std::move(rows));
  if (pending_rows_ < batch_size_) return out;
  ColumnBatch all = pending_.size() == 1 ? std::move(pending_[0]) : ColumnBatch::concat(pending_);
  pending_.clear();
  size_t begin = 0;
  for (; begin + batch_size_ <= all.row_count(); begin += batch_size_) {
    out.push_back(all.slice(begin, begin + batch_size_));
  }
  pending_rows_ = all.row_count() - begin;
  if (pending_rows_ > 0) pending_.push_back(all.slice(begin, all.row_count()));
  return out;
}

std::optional<ColumnBatch> Rebatcher::flush() {
  if (pending_rows_ == 0) return std::nullopt;
  ColumnBatch all = pending_.size() == 1 ? std::move(pending_[0]) : ColumnBatch::concat(pending_);
  pending_.clear();
  pending_rows_ = 0;
  return all;
}

}  // namespace featurebox::pipeline
