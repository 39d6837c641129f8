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
#include <string>
#include <vector>

#include "featurebox/columnstore/column_batch.h"
#include "featurebox/featureops/functions.h"
#include "featurebox/pipeline/config.h"

namespace featurebox::pipeline {

struct MiniBatch {
  std::vector<uint64_t> instance_ids;
  std::vector<uint8_t> labels;
  // Per instance: deduplicated and sorted ascending.
  std::vector<std::vector<featureops::FeatureSign>> features;

  size_t size() const { return instance_ids.size(); }
};

// Which merged columns carry signs: sign-list text columns produced by
// extraction, and Int64 basic columns tagged with a slot.
struct FeatureLayout {
  std::vector<std::string> sign_lists;
  std::vector<BasicFeature> basic;
};

// Gathers each row of a merged slice into one training instance. Throws
// SchemaError when instance_id, the label or a feature column is missing
// or a label is not 0/1.
MiniBatch emit_minibatch(const columnstore::ColumnBatch& merged, const std::string& label_column,
                         const FeatureLayout& layout);

// Hash of one instance; the batch digest XORs these so it does not depend
// on batch boundaries or instance order.
uint64_t instance_digest(uint64_t instance_id, uint8_t label,
                         const std::vector<featureops::FeatureSign>& signs);

struct SinkStats {
  uint64_t batches = 0;
  uint64_t instances = 0;
  uint64_t signs = 0;
  uint64_t digest = 0;
};

// Training stand-in: validates batches and keeps counts and the digest.
class TrainingSink {
 public:
  // Throws Error on duplicate ids, unsorted or repeated signs, labels other
  // than 0/1, or ragged fields. Rejected batches leave the stats untouched.
  void consume(const MiniBatch& batch);
  const SinkStats& stats() const { return stats_; }

 private:
  SinkStats stats_;
};

// Regroups a stream of variable-sized row batches into batches of exactly
// `batch_size` rows (the last one may be short).
class Rebatcher {
 public:
  explicit Rebatcher(size_t batch_size) : batch_size_(batch_size) {}

  std::vector<columnstore::ColumnBatch> add(columnstore::ColumnBatch rows);
  std::optional<columnstore::ColumnBatch> flush();

 private:
  size_t batch_size_;
  std::vector<columnstore::ColumnBatch> pending_;
  size_t pending_rows_ = 0;
};

}  // namespace featurebox::pipeline
