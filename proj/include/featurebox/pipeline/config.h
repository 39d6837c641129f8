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
#include <optional>
#include <string>
#include <vector>

#include "featurebox/device/executor.h"
#include "featurebox/featureops/operator_spec.h"
#include "featurebox/opgraph/plan.h"
#include "featurebox/viewpipe/clean.h"

namespace featurebox::pipeline {

struct ViewSource {
  std::string name;
  std::filesystem::path path;
  std::vector<std::string> columns;  // empty: every column in the file
  viewpipe::CleanPolicy clean;
  // Keys joining this view onto the views before it. Unused for view 0,
  // which drives the pipeline and carries instance_id and the label.
  std::vector<std::string> join_keys;
};

// An Int64 column of precomputed signs, reported under `slot`.
struct BasicFeature {
  std::string column;
  uint16_t slot = 0;
};

// Precomputed features keyed by instance_id. Streaming reads it row-aligned
// with view 0, so row i of both files must describe the same instance.
struct BasicSource {
  std::filesystem::path path;
  std::vector<BasicFeature> features;
};

enum class Mode { kPipelined, kStaged };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view text);  // throws ConfigError

struct PipelineConfig {
  std::vector<ViewSource> views;
  std::optional<BasicSource> basic;
  std::string label_column = "click";
  std::vector<featureops::OperatorSpec> operators;
  std::vector<std::string> features;  // sign-list columns fed to training
  size_t batch_size = 1024;
  Mode mode = Mode::kPipelined;
  uint64_t device_memory_bytes = uint64_t{16} << 30;
  device::ExecConfig exec;
  size_t queue_depth = 4;
  std::filesystem::path staging_dir = "staging";
  std::filesystem::path base_dir;  // relative paths resolve against this
};

// Parses the JSON config format described in docs/config.md. Relative
// paths are resolved against `base_dir`. Throws ConfigError.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

// Throws ConfigError if the file is missing or invalid.
PipelineConfig load_config(const std::filesystem::path& path);

// Expands, layers and places the operators. Dictionary-backed calls
// count at least their table size toward the footprint.
opgraph::LayerPlan build_plan(const PipelineConfig& config);

// Schema-level check of everything a run touches: view files exist,
// cleaning and join columns resolve, operator inputs are produced somewhere
// upstream, and the feature, label and basic columns exist. Throws
// ConfigError.
void validate_sources(const PipelineConfig& config);

}  // namespace featurebox::pipeline
