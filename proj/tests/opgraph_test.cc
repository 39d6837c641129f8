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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "featurebox/opgraph/plan.h"
#include "fig4.h"

namespace featurebox::opgraph {
namespace {

using featureops::FunctionRef;
using featureops::OperatorSpec;

std::set<std::string> labelled(const LayerPlan& plan, size_t layer) {
  auto labels = featurebox::testing::fig4_labels();
  std::set<std::string> out;
  for (const auto& n : plan.layer_names(layer)) out.insert(labels.at(n));
  return out;
}

std::set<std::pair<std::string, std::string>> labelled_edges(const OperatorDag& dag) {
  auto labels = featurebox::testing::fig4_labels();
  std::set<std::pair<std::string, std::string>> out;
  for (auto [u, v] : dag.edges) out.emplace(labels.at(dag.nodes[u].name), labels.at(dag.nodes[v].name));
  return out;
}

// Relaxes every edge n times; no topological order involved.
std::vector<size_t> relaxation_depths(const OperatorDag& dag) {
  std::vector<size_t> depth(dag.nodes.size(), 1);
  for (size_t round = 0; round < dag.nodes.size(); ++round) {
    for (auto [u, v] : dag.edges) depth[v] = std::max(depth[v], depth[u] + 1);
  }
  return depth;
}

OperatorDag random_dag(std::mt19937_64& rng, size_t max_nodes = 100) {
  size_t n = 1 + rng() % max_nodes;
  std::vector<size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<DagNode> nodes(n);
  for (size_t i = 0; i < n; ++i) nodes[i].name = "n" + std::to_string(rng() % 100000) + "_" + std::to_string(i);
  double p = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
  std::bernoulli_distribution edge(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = 0; b < n; ++b) {
      if (rank[a] < rank[b] && edge(rng)) edges.emplace_back(a, b);
    }
  }
  for (auto& node : nodes) node.footprint_bytes = 1 + rng() % 1000;
  return make_dag(std::move(nodes), std::move(edges));
}

TEST(ExpandTest, ExampleGraphHasEightNodesAndFiveEdges) {
  auto specs = featurebox::testing::fig4_specs();
  auto dag = expand_call_graph(specs);
  EXPECT_EQ(dag.nodes.size(), 8u);
  std::set<std::pair<std::string, std::string>> expected{
      {"Op4", "Op2"}, {"Op5", "Op3"}, {"Op1", "Op6"}, {"Op2", "Op7"}, {"Op3", "Op8"}};
  EXPECT_EQ(labelled_edges(dag), expected);
}

TEST(ExpandTest, SingleOperatorWithoutCalls) {
  std::vector<OperatorSpec> specs{{"solo", {}, {}, {}, {}, FunctionRef{"f"}, 1}};
  auto dag = expand_call_graph(specs);
  EXPECT_EQ(dag.nodes.size(), 1u);
  EXPECT_TRUE(dag.edges.empty());
}

TEST(ExpandTest, ColumnConsumerGetsProducerEdge) {
  std::vector<OperatorSpec> specs{
      {"consumer", {"mid"}, {"out"}, {}, {}, FunctionRef{"f"}, 1},
      {"producer", {"raw"}, {"mid"}, {}, {}, FunctionRef{"g"}, 1},
  };
  auto dag = expand_call_graph(specs);
  ASSERT_EQ(dag.edges.size(), 1u);
  EXPECT_EQ(dag.nodes[dag.edges[0].first].name, "producer");
  EXPECT_EQ(dag.nodes[dag.edges[0].second].name, "consumer");
}

TEST(ExpandTest, WiredCallsCreateNodeLevelEdges) {
  std::vector<OperatorSpec> specs{
      {"a", {"q"}, {"sig"}, {FunctionRef{"split", {"q"}, "tok"}}, {},
       FunctionRef{"hash_tokens", {"tok"}, "sig"}, 1},
      {"b", {"sig"}, {"x"}, {}, {}, FunctionRef{"cross", {"sig", "y"}, "x"}, 1},
  };
  auto dag = expand_call_graph(specs);
  ASSERT_EQ(dag.nodes.size(), 3u);
  auto pre = *dag.find("a.pre0.split");
  auto a = *dag.find("a");
  auto b = *dag.find("b");
  EXPECT_EQ(dag.edges, (std::vector<std::pair<NodeId, NodeId>>{{pre, a}, {a, b}}));
}

TEST(ExpandTest, NodeCountMatchesCallCount) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<OperatorSpec> specs;
    size_t expected = 0;
    for (size_t i = 0, n = 1 + rng() % 10; i < n; ++i) {
      OperatorSpec s{"op" + std::to_string(i), {}, {}, {}, {}, FunctionRef{"f"}, 1};
      s.pre_calls.resize(rng() % 3, FunctionRef{"pre"});
      s.post_calls.resize(rng() % 3, FunctionRef{"post"});
      expected += 1 + s.pre_calls.size() + s.post_calls.size();
      specs.push_back(s);
    }
    auto dag = expand_call_graph(specs);
    ASSERT_EQ(dag.nodes.size(), expected);
    auto pred = dag.predecessors();
    for (NodeId n = 0; n < dag.nodes.size(); ++n) {
      const auto& node = dag.nodes[n];
      NodeId body = *dag.find(node.op);
      if (node.role == NodeRole::kPreCall) {
        EXPECT_TRUE(std::count(dag.edges.begin(), dag.edges.end(), std::pair{n, body}));
      } else if (node.role == NodeRole::kPostCall) {
        EXPECT_TRUE(std::count(dag.edges.begin(), dag.edges.end(), std::pair{body, n}));
      }
    }
  }
}

TEST(ExpandTest, RejectsCyclesAndDuplicates) {
  std::vector<OperatorSpec> cyclic{
      {"A", {"x"}, {"y"}, {}, {}, FunctionRef{"f"}, 1},
      {"B", {"y"}, {"x"}, {}, {}, FunctionRef{"g"}, 1},
  };
  try {
    expand_call_graph(cyclic);
    FAIL() << "expected a cycle";
  } catch (const CycleError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("A"), std::string::npos);
    EXPECT_NE(msg.find("B"), std::string::npos);
  }
  std::vector<OperatorSpec> dup{{"A", {}, {}, {}, {}, FunctionRef{"f"}, 1}, {"A", {}, {}, {}, {}, FunctionRef{"f"}, 1}};
  EXPECT_THROW(expand_call_graph(dup), ConfigError);
  std::vector<OperatorSpec> two_writers{{"A", {}, {"c"}, {}, {}, FunctionRef{"f"}, 1},
                                        {"B", {}, {"c"}, {}, {}, FunctionRef{"f"}, 1}};
  EXPECT_THROW(expand_call_graph(two_writers), ConfigError);
}

TEST(LayerTest, ExampleGraphHasThreeLayers) {
  auto plan = layer_schedule(expand_call_graph(featurebox::testing::fig4_specs()));
  ASSERT_EQ(plan.layers.size(), 3u);
  EXPECT_EQ(labelled(plan, 1), (std::set<std::string>{"Op1", "Op4", "Op5"}));
  EXPECT_EQ(labelled(plan, 2), (std::set<std::string>{"Op2", "Op3", "Op6"}));
  EXPECT_EQ(labelled(plan, 3), (std::set<std::string>{"Op7", "Op8"}));
}

TEST(LayerTest, ChainAndIndependentNodes) {
  std::vector<DagNode> chain(3);
  chain[0].name = "a";
  chain[1].name = "b";
  chain[2].name = "c";
  auto plan = layer_schedule(make_dag(chain, {{0, 1}, {1, 2}}));
  EXPECT_EQ(plan.layers, (std::vector<std::vector<NodeId>>{{0}, {1}, {2}}));

  std::vector<DagNode> free(5);
  for (size_t i = 0; i < 5; ++i) free[i].name = std::string(1, static_cast<char>('e' - i));
  auto flat = layer_schedule(make_dag(free, {}));
  ASSERT_EQ(flat.layers.size(), 1u);
  EXPECT_EQ(flat.layer_names(1), (std::vector<std::string>{"a", "b", "c", "d", "e"}));
}

TEST(LayerTest, CyclicDagIsRejected) {
  std::vector<DagNode> nodes(2);
  nodes[0].name = "p";
  nodes[1].name = "q";
  EXPECT_THROW(layer_schedule(make_dag(nodes, {{0, 1}, {1, 0}})), CycleError);
}

TEST(LayerPropertyTest, MatchesRelaxationOracleOnRandomDags) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 300; ++t) {
    auto dag = random_dag(rng);
    auto plan = layer_schedule(dag);
    ASSERT_EQ(plan.layer_of, relaxation_depths(dag));
    for (auto [u, v] : dag.edges) ASSERT_LT(plan.layer_of[u], plan.layer_of[v]);
    auto again = layer_schedule(plan.dag);
    ASSERT_EQ(again.layers, plan.layers);
    for (const auto& layer : plan.layers) {
      ASSERT_FALSE(layer.empty());
      for (size_t i = 1; i < layer.size(); ++i) ASSERT_LT(dag.nodes[layer[i - 1]].name, dag.nodes[layer[i]].name);
    }
  }
}

TEST(PlacementTest, LargeLookupGoesToHostWithOneTransfer) {
  auto dag = expand_call_graph(featurebox::testing::fig4_specs(uint64_t{1} << 34));
  auto plan = place_operators(layer_schedule(dag), {uint64_t{8} << 30});
  auto labels = featurebox::testing::fig4_labels();
  for (NodeId n = 0; n < dag.nodes.size(); ++n) {
    EXPECT_EQ(plan.placement[n], labels.at(dag.nodes[n].name) == "Op5" ? Placement::kHost : Placement::kDevice);
  }
  ASSERT_EQ(plan.transfers.size(), 1u);
  const auto& t = plan.transfers[0];
  EXPECT_EQ(labels.at(dag.nodes[t.producer].name), "Op5");
  EXPECT_EQ(labels.at(dag.nodes[t.consumer].name), "Op3");
  EXPECT_EQ(t.layer, 2u);
}

TEST(PlacementTest, UnlimitedAndTinyBudgets) {
  auto plan = layer_schedule(expand_call_graph(featurebox::testing::fig4_specs()));
  auto all_device = place_operators(plan, {});
  EXPECT_TRUE(std::all_of(all_device.placement.begin(), all_device.placement.end(),
                          [](Placement p) { return p == Placement::kDevice; }));
  EXPECT_TRUE(all_device.transfers.empty());
  auto all_host = place_operators(plan, {1});
  EXPECT_TRUE(std::all_of(all_host.placement.begin(), all_host.placement.end(),
                          [](Placement p) { return p == Placement::kHost; }));
  EXPECT_TRUE(all_host.transfers.empty());
  EXPECT_THROW(place_operators(plan, {0}), ConfigError);
}

TEST(PlacementPropertyTest, MonotoneInBudgetAndOrdered) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 200; ++t) {
    auto plan = layer_schedule(random_dag(rng, 60));
    uint64_t low = 1 + rng() % 1000;
    uint64_t high = low + rng() % 1000;
    auto a = place_operators(plan, {low});
    auto b = place_operators(plan, {high});
    size_t host_to_device = 0;
    for (NodeId n = 0; n < plan.dag.nodes.size(); ++n) {
      if (a.placement[n] == Placement::kDevice) ASSERT_EQ(b.placement[n], Placement::kDevice);
    }
    for (auto [u, v] : a.dag.edges) {
      host_to_device += a.placement[u] == Placement::kHost && a.placement[v] == Placement::kDevice;
    }
    ASSERT_EQ(a.transfers.size(), host_to_device);
    for (const auto& tr : a.transfers) {
      ASSERT_LT(a.layer_of[tr.producer], tr.layer);
      ASSERT_LE(tr.layer, a.layer_of[tr.consumer]);
    }
  }
}

TEST(ExportTest, PlanTextIsDeterministic) {
  auto dag = expand_call_graph(featurebox::testing::fig4_specs(uint64_t{1} << 34));
  auto text = export_plan(place_operators(layer_schedule(dag), {uint64_t{1} << 30}));
  EXPECT_EQ(text, export_plan(place_operators(layer_schedule(dag), {uint64_t{1} << 30})));
  EXPECT_NE(text.find("\"h2d:Op3.pre0.Func2->Op3\""), std::string::npos);
  EXPECT_NE(text.find("\"placement\": \"host\""), std::string::npos);
}

}  // namespace
}  // namespace featurebox::opgraph
