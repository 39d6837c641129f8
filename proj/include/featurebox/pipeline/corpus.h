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
#include <filesystem>
#include <string>
#include <vector>

#include "featurebox/columnstore/column_batch.h"

namespace featurebox::pipeline {

struct CorpusOptions {
  uint64_t instances = 0;
  size_t views = 2;  // 1: impressions only; 2: + users; 3: + ads; more: user extension views
  uint64_t seed = 1;
  std::filesystem::path out;
  size_t batch_size = 4096;  // written into the generated pipeline.json
};

struct CorpusView {
  std::string name;
  std::vector<columnstore::ColumnDef> columns;
};

// Documented schema of every generated view file, in file order.
std::vector<CorpusView> corpus_layout(size_t views);
std::vector<columnstore::ColumnDef> basic_layout();

struct CorpusManifest {
  std::vector<std::filesystem::path> files;  // views, basic.fbxc, dict.tsv
  std::filesystem::path config;              // pipeline.json
};

// Writes a seeded synthetic click log: an impressions view (instance_id,
// click label, query text, a JSON context column with malformed and null
// rows), a users view missing some users, an ads view, row-aligned basic
// features, a city dictionary and a pipeline config that uses all of them.
// Same options give byte-identical files. Throws ConfigError when views is
// 0 and IoError when `out` is not writable.
CorpusManifest generate_corpus(const CorpusOptions& options);

}  // namespace featurebox::pipeline
