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

#include "featurebox/opgraph/plan.h"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

namespace featurebox::opgraph {
namespace {

void normalize_edges(std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// Names a cycle among the nodes Kahn's algorithm could not order.
std::string describe_cycle(const OperatorDag& dag, const std::vector<size_t>& indegree) {
  NodeId start = 0;
  while (indegree[start] == 0) ++start;
  // Every stuck node has a stuck predecessor, so walking stuck predecessors
  // must revisit a node.
  auto pred = dag.predecessors();
  std::vector<int> seen_at(dag.nodes.size(), -1);
  std::vector<NodeId> walk;
  NodeId cur = start;
  while (seen_at[cur] < 0) {
    seen_at[cur] = static_cast<int>(walk.size());
    walk.push_back(cur);
    for (NodeId p : pred[cur]) {
      if (indegree[p] > 0) {
        cur = p;
        break;
      }
    }
  }
  std::vector<NodeId> cycle(walk.begin() + seen_at[cur], walk.end());
  std::reverse(cycle.begin(), cycle.end());
  auto first = std::min_element(cycle.begin(), cycle.end(),
                                [&](NodeId a, NodeId b) { return dag.nodes[a].name < dag.nodes[b].name; });
  std::rotate(cycle.begin(), first, cycle.end());
  std::string text;
  for (NodeId n : cycle) text += dag.nodes[n].name + " -> ";
  return text + dag.nodes[cycle.front()].name;
}

}  // namespace

std::optional<NodeId> OperatorDag::find(std::string_view name) const {
  for (NodeId i = 0; i < nodes.size(); ++i) {
    if (nodes[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::vector<NodeId>> OperatorDag::predecessors() const {
  std::vector<std::vector<NodeId>> out(nodes.size());
  for (auto [u, v] : edges) out[v].push_back(u);
  return out;
}

std::vector<std::vector<NodeId>> OperatorDag::successors() const {
  std::vector<std::vector<NodeId>> out(nodes.size());
  for (auto [u, v] : edges) out[u].push_back(v);
  return out;
}

OperatorDag make_dag(std::vector<DagNode> nodes, std::vector<std::pair<NodeId, NodeId>> edges) {
  for (auto [u, v] : edges) {
    if (u >= nodes.size() || v >= nodes.size()) throw ConfigError("edge endpoint out of range");
  }
  OperatorDag dag{std::move(nodes), std::move(edges)};
  normalize_edges(dag.edges);
  return dag;
}

std::vector<NodeId> topological_order(const OperatorDag& dag) {
  std::vector<size_t> indegree(dag.nodes.size(), 0);
  for (auto [u, v] : dag.edges) {
    if (u == v) throw CycleError("dependency cycle: " + dag.nodes[u].name + " -> " + dag.nodes[u].name);
    ++indegree[v];
  }
  auto succ = dag.successors();
  std::vector<NodeId> order;
  std::vector<NodeId> ready;
  for (NodeId i = 0; i < dag.nodes.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    NodeId n = ready.back();
    ready.pop_back();
    order.push_back(n);
    for (NodeId s : succ[n]) {
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  if (order.size() != dag.nodes.size()) {
    throw CycleError("dependency cycle: " + describe_cycle(dag, indegree));
  }
  return order;
}

OperatorDag expand_call_graph(std::span<const featureops::OperatorSpec> specs) {
  OperatorDag dag;
  std::set<std::string> op_names;
  std::vector<std::pair<NodeId, NodeId>> edges;

  for (const auto& spec : specs) {
    if (!op_names.insert(spec.name).second) {
      throw ConfigError("duplicate operator name '" + spec.name + "'");
    }
    bool wired = !spec.body.args.empty() || !spec.body.out.empty();
    for (const auto& c : spec.pre_calls) wired = wired || !c.args.empty() || !c.out.empty();
    for (const auto& c : spec.post_calls) wired = wired || !c.args.empty() || !c.out.empty();

    auto add = [&](std::string name, NodeRole role, const featureops::FunctionRef& call) {
      DagNode node;
      node.name = std::move(name);
      node.role = role;
      node.op = spec.name;
      node.call = call;
      node.reads = call.args;
      if (!call.out.empty()) node.writes.push_back(call.out);
      node.footprint_bytes = call.footprint_bytes.value_or(spec.footprint_bytes);
      dag.nodes.push_back(std::move(node));
      return dag.nodes.size() - 1;
    };

    std::vector<NodeId> pres;
    for (size_t i = 0; i < spec.pre_calls.size(); ++i) {
      const auto& c = spec.pre_calls[i];
      pres.push_back(add(spec.name + ".pre" + std::to_string(i) + "." + c.function, NodeRole::kPreCall, c));
    }
    NodeId body = add(spec.name, NodeRole::kBody, spec.body);
    if (!wired) {
      dag.nodes[body].reads = spec.inputs;
      dag.nodes[body].writes = spec.outputs;
    }
    for (NodeId p : pres) edges.emplace_back(p, body);
    for (size_t j = 0; j < spec.post_calls.size(); ++j) {
      const auto& c = spec.post_calls[j];
      NodeId post = add(spec.name + ".post" + std::to_string(j) + "." + c.function, NodeRole::kPostCall, c);
      edges.emplace_back(body, post);
    }
  }

  std::map<std::string, NodeId> writer;
  for (NodeId i = 0; i < dag.nodes.size(); ++i) {
    for (const auto& col : dag.nodes[i].writes) {
      auto [it, fresh] = writer.emplace(col, i);
      if (!fresh) {
        throw ConfigError("column '" + col + "' is written by both '" + dag.nodes[it->second].name +
                          "' and '" + dag.nodes[i].name + "'");
      }
    }
  }
  for (NodeId i = 0; i < dag.nodes.size(); ++i) {
    for (const auto& col : dag.nodes[i].reads) {
      auto it = writer.find(col);
      if (it == writer.end()) continue;
      if (it->second == i) throw CycleError("dependency cycle: " + dag.nodes[i].name + " reads its own output '" + col + "'");
      edges.emplace_back(it->second, i);
    }
  }
  dag.edges = std::move(edges);
  normalize_edges(dag.edges);
  topological_order(dag);
  return dag;
}

std::string_view placement_name(Placement p) { return p == Placement::kHost ? "host" : "device"; }

std::vector<std::string> LayerPlan::layer_names(size_t layer) const {
  std::vector<std::string> out;
  for (NodeId n : layers.at(layer - 1)) out.push_back(dag.nodes[n].name);
  return out;
}

LayerPlan layer_schedule(const OperatorDag& dag) {
  auto order = topological_order(dag);
  auto pred = dag.predecessors();
  LayerPlan plan;
  plan.dag = dag;
  plan.layer_of.assign(dag.nodes.size(), 1);
  size_t depth = 0;
  for (NodeId n : order) {
    for (NodeId p : pred[n]) plan.layer_of[n] = std::max(plan.layer_of[n], plan.layer_of[p] + 1);
    depth = std::max(depth, plan.layer_of[n]);
  }
  plan.layers.resize(depth);
  for (NodeId n = 0; n < dag.nodes.size(); ++n) plan.layers[plan.layer_of[n] - 1].push_back(n);
  for (auto& layer : plan.layers) {
    std::sort(layer.begin(), layer.end(),
              [&](NodeId a, NodeId b) { return dag.nodes[a].name < dag.nodes[b].name; });
  }
  return plan;
}

LayerPlan place_operators(LayerPlan plan, const PlacementBudget& budget) {
  if (budget.device_memory_bytes == 0) throw ConfigError("device memory budget must be positive");
  const auto& nodes = plan.dag.nodes;
  plan.placement.clear();
  for (const auto& n : nodes) {
    plan.placement.push_back(n.footprint_bytes > budget.device_memory_bytes ? Placement::kHost
                                                                            : Placement::kDevice);
  }
  plan.transfers.clear();
  for (auto [u, v] : plan.dag.edges) {
    if (plan.placement[u] != Placement::kHost || plan.placement[v] != Placement::kDevice) continue;
    Transfer t;
    t.name = "h2d:" + nodes[u].name + "->" + nodes[v].name;
    t.producer = u;
    t.consumer = v;
    t.layer = plan.layer_of[u] + 1;
    for (const auto& col : nodes[u].writes) {
      if (std::find(nodes[v].reads.begin(), nodes[v].reads.end(), col) != nodes[v].reads.end()) {
        t.columns.push_back(col);
      }
    }
    // Structural edges carry no named column; ship everything produced.
    if (t.columns.empty()) t.columns = nodes[u].writes;
    plan.transfers.push_back(std::move(t));
  }
  std::sort(plan.transfers.begin(), plan.transfers.end(), [](const Transfer& a, const Transfer& b) {
    return std::tie(a.layer, a.name) < std::tie(b.layer, b.name);
  });
  return plan;
}

std::string export_plan(const LayerPlan& plan) {
  using nlohmann::ordered_json;
  const auto& nodes = plan.dag.nodes;
  ordered_json out;
  out["layers"] = ordered_json::array();
  for (size_t i = 0; i < plan.layers.size(); ++i) {
    ordered_json layer;
    layer["layer"] = i + 1;
    layer["operators"] = ordered_json::array();
    for (NodeId n : plan.layers[i]) {
      ordered_json op;
      op["name"] = nodes[n].name;
      op["function"] = nodes[n].call.function;
      op["placement"] = plan.placed() ? std::string(placement_name(plan.placement[n])) : "unplaced";
      op["footprint_bytes"] = nodes[n].footprint_bytes;
      layer["operators"].push_back(std::move(op));
    }
    out["layers"].push_back(std::move(layer));
  }
  out["edges"] = ordered_json::array();
  for (auto [u, v] : plan.dag.edges) out["edges"].push_back({nodes[u].name, nodes[v].name});
  out["transfers"] = ordered_json::array();
  for (const auto& t : plan.transfers) {
    ordered_json tj;
    tj["name"] = t.name;
    tj["from"] = nodes[t.producer].name;
    tj["to"] = nodes[t.consumer].name;
    tj["layer"] = t.layer;
    tj["columns"] = t.columns;
    out["transfers"].push_back(std::move(tj));
  }
  return out.dump(2) + "\n";
}

}  // namespace featurebox::opgraph
