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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "featurebox/common/error.h"
#include "featurebox/common/worker_pool.h"
#include "featurebox/device/cost_model.h"
#include "featurebox/device/grid.h"
#include "featurebox/featureops/frame.h"
#include "featurebox/featureops/kernels.h"
#include "featurebox/mempool/arena_pool.h"
#include "featurebox/opgraph/plan.h"

namespace featurebox::device {

struct ExecConfig {
  size_t lanes_per_group = 256;
  size_t device_groups = 4;  // work-groups in flight at once
  size_t host_workers = 4;
  uint64_t pool_bytes = uint64_t{64} << 20;
  double h2d_bytes_per_sec = 12e9;
  double launch_overhead_us = kDefaultLaunchOverheadUs;
  bool fused = true;  // false: one launch per device operator
};

struct ExecCounters {
  uint64_t launches = 0;
  uint64_t device_ops = 0;
  uint64_t bytes_transferred = 0;
  double launch_overhead_us = 0;
  double transfer_us = 0;
};

// Execution resources and simulated-cost counters for one run.
class ExecContext {
 public:
  explicit ExecContext(const ExecConfig& config);

  const ExecConfig& config() const { return config_; }
  WorkerPool& host() { return host_; }
  DeviceGrid& grid() { return grid_; }
  mempool::ArenaPool& pool() { return pool_; }

  void record_launches(uint64_t n) { launches_ += n; }
  void record_device_ops(uint64_t n) { device_ops_ += n; }
  void record_transfer(uint64_t bytes) { bytes_transferred_ += bytes; }

  // Simulated times derive from the counters, so they never decrease.
  ExecCounters counters() const;

 private:
  ExecConfig config_;
  WorkerPool host_;
  WorkerPool device_workers_;
  mempool::ArenaPool pool_;
  DeviceGrid grid_;
  std::atomic<uint64_t> launches_{0};
  std::atomic<uint64_t> device_ops_{0};
  std::atomic<uint64_t> bytes_transferred_{0};
};

// The device-placed bodies of one layer, run back to back under a single
// launch.
struct MetaKernel {
  size_t layer = 0;                  // 1-based
  std::vector<opgraph::NodeId> nodes;  // operator-name order
};

// One meta-kernel per layer that has a device operator. Throws ConfigError
// on an unplaced plan.
std::vector<MetaKernel> build_meta_kernels(const opgraph::LayerPlan& plan);

// A failing operator body, identified by node name.
class OperatorError : public Error {
 public:
  OperatorError(std::string op, const std::string& message)
      : Error("operator '" + op + "' failed: " + message), op_(std::move(op)) {}
  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

// Runs a placed plan over feature frames, layer by layer.
class PlanExecutor {
 public:
  // `kernels` is indexed by node; an empty kernel is a no-op.
  PlanExecutor(opgraph::LayerPlan plan, std::vector<featureops::Kernel> kernels, ExecContext& ctx);

  // Binds each node's call through `library`. Nodes without a function
  // get a no-op kernel.
  static std::vector<featureops::Kernel> bind_kernels(const opgraph::LayerPlan& plan,
                                                      const featureops::FunctionLibrary& library,
                                                      const std::filesystem::path& base_dir);

  const opgraph::LayerPlan& plan() const { return plan_; }
  const std::vector<MetaKernel>& meta_kernels() const { return meta_; }

  // Transfers due at this layer, then host operators on the host pool
  // alongside the layer's meta-kernel, then a barrier. Every input column
  // must carry a version stamp from an earlier layer, and device readers
  // need it device-visible. Throws OperatorError naming the failing node.
  void execute_layer(size_t layer, featureops::FeatureFrame& frame);

  // Drops earlier outputs of the plan's nodes, then runs every layer.
  void run(featureops::FeatureFrame& frame);

 private:
  void check_inputs(opgraph::NodeId node, size_t layer, const featureops::FeatureFrame& frame) const;
  void run_node(opgraph::NodeId node, featureops::FeatureFrame& frame, bool on_device);

  opgraph::LayerPlan plan_;
  std::vector<featureops::Kernel> kernels_;
  ExecContext& ctx_;
  std::vector<MetaKernel> meta_;
};

}  // namespace featurebox::device
