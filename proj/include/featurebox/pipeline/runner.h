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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "featurebox/common/error.h"
#include "featurebox/device/executor.h"
#include "featurebox/pipeline/config.h"
#include "featurebox/pipeline/minibatch.h"
#include "featurebox/viewpipe/clean.h"

namespace featurebox::pipeline {

struct RunReport {
  Mode mode = Mode::kPipelined;
  std::vector<std::pair<std::string, double>> stage_seconds;  // busy time per stage
  double wall_seconds = 0;
  uint64_t intermediate_bytes_written = 0;
  uint64_t intermediate_files = 0;
  uint64_t input_bytes_read = 0;
  viewpipe::CleanStats clean;  // summed over views
  uint64_t joined_rows = 0;
  uint64_t merged_rows = 0;
  device::ExecCounters device;
  SinkStats sink;

  // Human-readable summary followed by a key=value block.
  std::string to_text() const;
};

// Parses the key=value block of RunReport::to_text.
std::vector<std::pair<std::string, std::string>> parse_report_values(const std::string& text);

// A stage failure, tagged with the stage name and the chunk or batch index.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, uint64_t batch, const std::string& message)
      : Error("stage '" + stage + "' failed at batch " + std::to_string(batch) + ": " + message),
        stage_(std::move(stage)),
        batch_(batch) {}
  const std::string& stage() const { return stage_; }
  uint64_t batch() const { return batch_; }

 private:
  std::string stage_;
  uint64_t batch_;
};

using BatchObserver = std::function<void(const MiniBatch&)>;

// Streams view 0 in batch_size row ranges through clean, join, extract and
// merge on a chain of threads joined by bounded queues, and feeds the sink
// batches of exactly batch_size instances. Dimension views are cleaned
// once up front. Writes no files.
RunReport run_pipelined(const PipelineConfig& config, const BatchObserver& observer = {});

// Baseline: every stage writes its full output under staging_dir
// (stage1_clean/, stage2_join/, stage3_extract/) and the next stage reads
// it back.
RunReport run_staged(const PipelineConfig& config, const BatchObserver& observer = {});

// Dispatches on config.mode.
RunReport run(const PipelineConfig& config, const BatchObserver& observer = {});

}  // namespace featurebox::pipeline
