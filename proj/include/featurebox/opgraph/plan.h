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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "featurebox/common/error.h"
#include "featurebox/featureops/operator_spec.h"

namespace featurebox::opgraph {

using NodeId = size_t;

enum class NodeRole { kBody, kPreCall, kPostCall };

struct DagNode {
  std::string name;
  NodeRole role = NodeRole::kBody;
  std::string op;               // owning operator
  featureops::FunctionRef call;  // what the node runs
  std::vector<std::string> reads;
  std::vector<std::string> writes;
  uint64_t footprint_bytes = 1;
};

// Fine-granularity operator graph. Edges are unique and sorted; (u, v)
// means u must finish before v starts.
struct OperatorDag {
  std::vector<DagNode> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;

  std::optional<NodeId> find(std::string_view name) const;
  std::vector<std::vector<NodeId>> predecessors() const;
  std::vector<std::vector<NodeId>> successors() const;
};

class CycleError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Builds a DAG from bare nodes and edges, deduplicating edges. Used for
// graphs that do not come from operator specs.
OperatorDag make_dag(std::vector<DagNode> nodes, std::vector<std::pair<NodeId, NodeId>> edges);

// One node per operator body and per pre/post call. A pre call feeds its
// caller's body, the body feeds each post call, and every column read
// gets an edge from the node that writes it. Calls that leave column
// wiring empty make the body read the operator inputs and write its
// outputs. Throws ConfigError on duplicate operator names or two nodes
// writing one column, and CycleError naming the cycle.
OperatorDag expand_call_graph(std::span<const featureops::OperatorSpec> specs);

// Throws CycleError when the graph is cyclic.
std::vector<NodeId> topological_order(const OperatorDag& dag);

enum class Placement { kDevice, kHost };

std::string_view placement_name(Placement p);

struct PlacementBudget {
  uint64_t device_memory_bytes = std::numeric_limits<uint64_t>::max();
};

// Host-to-device copy of a host producer's result for a device consumer.
// It runs at the start of `layer`, after the producer's layer and no later
// than the consumer's.
struct Transfer {
  std::string name;
  NodeId producer;
  NodeId consumer;
  size_t layer;
  std::vector<std::string> columns;
};

struct LayerPlan {
  OperatorDag dag;
  // layers[i] holds the nodes of layer i + 1, ordered by name.
  std::vector<std::vector<NodeId>> layers;
  std::vector<size_t> layer_of;  // 1-based, indexed by node
  std::vector<Placement> placement;  // empty until placed
  std::vector<Transfer> transfers;

  bool placed() const { return !placement.empty(); }
  std::vector<std::string> layer_names(size_t layer) const;
};

// Longest-path layering: sources sit in layer 1 and every other node one
// past its deepest predecessor.
LayerPlan layer_schedule(const OperatorDag& dag);

// Host iff the node's footprint exceeds the budget. One transfer per edge
// from a Host node into a Device node. Throws ConfigError on a zero budget.
LayerPlan place_operators(LayerPlan plan, const PlacementBudget& budget);

// Deterministic JSON text listing layers, placements and transfers.
std::string export_plan(const LayerPlan& plan);

}  // namespace featurebox::opgraph
