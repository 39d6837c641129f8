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

#include "featurebox/device/executor.h"

#include <algorithm>
#include <exception>
#include <future>
#include <map>
#include <utility>

namespace featurebox::device {

using featureops::FeatureFrame;
using featureops::FrameColumn;
using opgraph::NodeId;
using opgraph::Placement;

ExecContext::ExecContext(const ExecConfig& config)
    : config_(config),
      host_(std::max<size_t>(1, config.host_workers)),
      device_workers_(std::max<size_t>(1, config.device_groups)),
      pool_(config.pool_bytes),
      grid_(config.lanes_per_group, device_workers_, pool_) {
  if (!(config.h2d_bytes_per_sec > 0)) throw ConfigError("h2d bandwidth must be positive");
  if (!(config.launch_overhead_us > 0)) throw ConfigError("launch overhead must be positive");
}

ExecCounters ExecContext::counters() const {
  ExecCounters c;
  c.launches = launches_.load();
  c.device_ops = device_ops_.load();
  c.bytes_transferred = bytes_transferred_.load();
  c.launch_overhead_us = static_cast<double>(c.launches) * config_.launch_overhead_us;
  c.transfer_us = static_cast<double>(c.bytes_transferred) / config_.h2d_bytes_per_sec * 1e6;
  return c;
}

std::vector<MetaKernel> build_meta_kernels(const opgraph::LayerPlan& plan) {
  if (!plan.placed()) throw ConfigError("meta-kernels need a placed plan");
  std::vector<MetaKernel> out;
  for (size_t i = 0; i < plan.layers.size(); ++i) {
    MetaKernel mk;
    mk.layer = i + 1;
    for (NodeId n : plan.layers[i]) {
      if (plan.placement[n] == Placement::kDevice) mk.nodes.push_back(n);
    }
    if (!mk.nodes.empty()) out.push_back(std::move(mk));
  }
  return out;
}

PlanExecutor::PlanExecutor(opgraph::LayerPlan plan, std::vector<featureops::Kernel> kernels, ExecContext& ctx)
    : plan_(std::move(plan)), kernels_(std::move(kernels)), ctx_(ctx), meta_(build_meta_kernels(plan_)) {
  if (kernels_.size() != plan_.dag.nodes.size()) throw ConfigError("one kernel per plan node is required");
}

std::vector<featureops::Kernel> PlanExecutor::bind_kernels(const opgraph::LayerPlan& plan,
                                                           const featureops::FunctionLibrary& library,
                                                           const std::filesystem::path& base_dir) {
  std::vector<featureops::Kernel> out;
  for (const auto& node : plan.dag.nodes) {
    if (node.call.function.empty()) {
      out.emplace_back();
      continue;
    }
    if (node.call.out.empty()) throw ConfigError("operator '" + node.name + "' has no output column");
    try {
      out.push_back(library.bind(node.call, base_dir));
    } catch (const ConfigError& e) {
      throw ConfigError("operator '" + node.name + "': " + e.what());
    }
  }
  return out;
}

void PlanExecutor::check_inputs(NodeId node, size_t layer, const FeatureFrame& frame) const {
  const auto& n = plan_.dag.nodes[node];
  bool device = plan_.placement[node] == Placement::kDevice;
  for (const auto& col : n.reads) {
    if (!frame.contains(col)) throw OperatorError(n.name, "input column '" + col + "' is missing");
    const FrameColumn& c = frame.at(col);
    if (!c.written || c.layer >= static_cast<int>(layer)) {
      throw OperatorError(n.name, "barrier violation: input '" + col + "' is not yet produced");
    }
    if (device && !c.device_visible) {
      throw OperatorError(n.name, "barrier violation: input '" + col + "' has not reached the device");
    }
  }
}

void PlanExecutor::run_node(NodeId node, FeatureFrame& frame, bool on_device) {
  const auto& n = plan_.dag.nodes[node];
  const auto& kernel = kernels_[node];
  if (!kernel) return;
  featureops::KernelIO io;
  for (const auto& a : n.call.args) io.inputs.push_back(&frame.at(a));
  io.output = &frame.at(n.call.out);
  io.rows = frame.rows();
  io.device = on_device ? &ctx_.grid() : nullptr;
  kernel(io);
  if (io.output->rows() != frame.rows()) throw Error("produced " + std::to_string(io.output->rows()) + " rows");
}

void PlanExecutor::execute_layer(size_t layer, FeatureFrame& frame) {
  if (layer == 0 || layer > plan_.layers.size()) throw ConfigError("layer out of range");
  const auto& nodes = plan_.dag.nodes;

  // Host results bound for the device land before the layer starts. A
  // column already on the device is not shipped twice.
  for (const auto& t : plan_.transfers) {
    if (t.layer != layer) continue;
    uint64_t bytes = 0;
    for (const auto& col : t.columns) {
      if (!frame.contains(col)) continue;
      FrameColumn& c = frame.at(col);
      if (!c.written || c.layer >= static_cast<int>(layer)) {
        throw OperatorError(t.name, "barrier violation: '" + col + "' is not yet produced");
      }
      if (!c.device_visible) {
        bytes += c.byte_size();
        c.device_visible = true;
      }
    }
    ctx_.record_transfer(bytes);
  }

  std::vector<NodeId> host_nodes;
  std::vector<NodeId> device_nodes;
  for (NodeId n : plan_.layers[layer - 1]) {
    check_inputs(n, layer, frame);
    (plan_.placement[n] == Placement::kHost ? host_nodes : device_nodes).push_back(n);
    // Output slots exist before any writer starts, so the frame's index is
    // never modified concurrently.
    if (kernels_[n] && !frame.contains(nodes[n].call.out)) {
      FrameColumn& slot = frame.slot(nodes[n].call.out);
      slot.written = false;
      slot.data = std::vector<int64_t>(frame.rows());
    }
  }

  std::map<std::string, std::string> failures;
  std::mutex failures_mu;
  bool device_failed = false;
  auto guarded = [&](NodeId n, bool on_device) {
    try {
      run_node(n, frame, on_device);
    } catch (const std::exception& e) {
      std::lock_guard lock(failures_mu);
      failures.emplace(nodes[n].name, e.what());
      if (on_device) device_failed = true;
    }
  };

  std::vector<std::future<void>> host_done;
  for (NodeId n : host_nodes) host_done.push_back(ctx_.host().submit([&, n] { guarded(n, false); }));

  if (!device_nodes.empty()) {
    ctx_.record_device_ops(device_nodes.size());
    if (ctx_.config().fused) {
      ctx_.record_launches(1);
      for (NodeId n : device_nodes) {
        guarded(n, true);
        if (device_failed) break;
      }
      ctx_.pool().reset();
    } else {
      for (NodeId n : device_nodes) {
        ctx_.record_launches(1);
        guarded(n, true);
        ctx_.pool().reset();
        if (device_failed) break;
      }
    }
  }
  for (auto& f : host_done) f.get();

  if (!failures.empty()) {
    const auto& [name, message] = *failures.begin();
    throw OperatorError(name, message);
  }
  for (NodeId n : plan_.layers[layer - 1]) {
    for (const auto& col : nodes[n].writes) {
      if (!frame.contains(col)) continue;
      FrameColumn& c = frame.at(col);
      c.producer = nodes[n].name;
      c.layer = static_cast<int>(layer);
      c.written = true;
      c.device_visible = plan_.placement[n] == Placement::kDevice;
    }
  }
}

void PlanExecutor::run(FeatureFrame& frame) {
  for (const auto& n : plan_.dag.nodes) {
    for (const auto& col : n.writes) frame.erase(col);
  }
  for (size_t layer = 1; layer <= plan_.layers.size(); ++layer) execute_layer(layer, frame);
}

}  // namespace featurebox::device
