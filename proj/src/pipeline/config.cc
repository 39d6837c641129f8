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

#include "featurebox/pipeline/config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "featurebox/columnstore/fbxc.h"
#include "featurebox/featureops/kernels.h"
#include "featurebox/viewpipe/join.h"

namespace featurebox::pipeline {
namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": wrong value type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get_as<T>(j.at(key), where + "." + key);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* n) { return k == n; })) {
      throw ConfigError(where + ": unknown key '" + k + "'");
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

featureops::FunctionRef parse_call(const json& j, const std::string& where) {
  reject_unknown(j, {"function", "args", "out", "params", "footprint_bytes"}, where);
  featureops::FunctionRef ref;
  ref.function = get_as<std::string>(need(j, "function", where), where + ".function");
  ref.args = get_or<std::vector<std::string>>(j, "args", {}, where);
  ref.out = get_or<std::string>(j, "out", "", where);
  if (j.contains("params")) {
    const auto& params = j.at("params");
    if (!params.is_object()) throw ConfigError(where + ".params: expected an object");
    for (const auto& [k, v] : params.items()) {
      ref.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  if (j.contains("footprint_bytes")) ref.footprint_bytes = get_as<uint64_t>(j.at("footprint_bytes"), where);
  return ref;
}

viewpipe::FillValue parse_fill(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<int64_t>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError(where + ": fill values must be numbers or strings");
}

viewpipe::CleanPolicy parse_clean(const json& j, const std::string& where) {
  reject_unknown(j, {"fills", "extract", "filter"}, where);
  viewpipe::CleanPolicy policy;
  if (j.contains("fills")) {
    if (!j.at("fills").is_object()) throw ConfigError(where + ".fills: expected an object");
    for (const auto& [k, v] : j.at("fills").items()) policy.fills[k] = parse_fill(v, where + ".fills." + k);
  }
  if (j.contains("extract")) {
    for (const auto& e : j.at("extract")) {
      std::string w = where + ".extract";
      reject_unknown(e, {"source", "path", "output", "kind"}, w);
      viewpipe::JsonExtraction x;
      x.source = get_as<std::string>(need(e, "source", w), w);
      x.path = get_as<std::string>(need(e, "path", w), w);
      x.output = get_as<std::string>(need(e, "output", w), w);
      auto kind = columnstore::parse_kind(get_or<std::string>(e, "kind", "utf8", w));
      if (!kind) throw ConfigError(w + ": unknown kind");
      x.kind = *kind;
      policy.json_extractions.push_back(std::move(x));
    }
  }
  if (j.contains("filter")) policy.filter = viewpipe::Predicate::parse(get_as<std::string>(j.at("filter"), where));
  return policy;
}

featureops::OperatorSpec parse_operator(const json& j, const std::string& where) {
  reject_unknown(j, {"name", "inputs", "outputs", "pre", "body", "post", "footprint_bytes", "kind"}, where);
  featureops::OperatorSpec op;
  op.name = get_as<std::string>(need(j, "name", where), where + ".name");
  std::string w = where + "[" + op.name + "]";
  op.inputs = get_or<std::vector<std::string>>(j, "inputs", {}, w);
  op.outputs = get_or<std::vector<std::string>>(j, "outputs", {}, w);
  op.body = parse_call(need(j, "body", w), w + ".body");
  if (j.contains("pre")) {
    for (const auto& c : j.at("pre")) op.pre_calls.push_back(parse_call(c, w + ".pre"));
  }
  if (j.contains("post")) {
    for (const auto& c : j.at("post")) op.post_calls.push_back(parse_call(c, w + ".post"));
  }
  op.footprint_bytes = get_or<uint64_t>(j, "footprint_bytes", 1, w);
  std::string kind = get_or<std::string>(j, "kind", "compute", w);
  if (kind == "compute") op.kind = featureops::OperatorKind::kComputeBound;
  else if (kind == "memory") op.kind = featureops::OperatorKind::kMemoryBound;
  else throw ConfigError(w + ".kind: expected 'compute' or 'memory'");
  return op;
}

}  // namespace

std::string_view mode_name(Mode mode) { return mode == Mode::kStaged ? "staged" : "pipelined"; }

Mode parse_mode(std::string_view text) {
  if (text == "pipelined") return Mode::kPipelined;
  if (text == "staged") return Mode::kStaged;
  throw ConfigError("mode must be 'pipelined' or 'staged', got '" + std::string(text) + "'");
}

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root, {"views", "basic", "label_column", "operators", "features", "batch_size", "mode",
                        "device", "host_workers", "queue_depth", "staging_dir"},
                 "config");
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  if (root.contains("views")) {
    for (const auto& v : root.at("views")) {
      std::string w = "views";
      reject_unknown(v, {"name", "path", "columns", "clean", "join_keys"}, w);
      ViewSource view;
      view.name = get_as<std::string>(need(v, "name", w), w + ".name");
      w += "[" + view.name + "]";
      view.path = resolve(base_dir, get_as<std::string>(need(v, "path", w), w + ".path"));
      view.columns = get_or<std::vector<std::string>>(v, "columns", {}, w);
      if (v.contains("clean")) view.clean = parse_clean(v.at("clean"), w + ".clean");
      view.join_keys = get_or<std::vector<std::string>>(v, "join_keys", {}, w);
      cfg.views.push_back(std::move(view));
    }
  }
  if (root.contains("basic")) {
    const auto& b = root.at("basic");
    reject_unknown(b, {"path", "features"}, "basic");
    BasicSource basic;
    basic.path = resolve(base_dir, get_as<std::string>(need(b, "path", "basic"), "basic.path"));
    for (const auto& f : need(b, "features", "basic")) {
      reject_unknown(f, {"column", "slot"}, "basic.features");
      basic.features.push_back({get_as<std::string>(need(f, "column", "basic.features"), "basic.features"),
                                get_as<uint16_t>(need(f, "slot", "basic.features"), "basic.features")});
    }
    cfg.basic = std::move(basic);
  }
  cfg.label_column = get_or<std::string>(root, "label_column", cfg.label_column, "config");
  if (root.contains("operators")) {
    for (const auto& o : root.at("operators")) cfg.operators.push_back(parse_operator(o, "operators"));
  }
  cfg.features = get_or<std::vector<std::string>>(root, "features", {}, "config");
  cfg.batch_size = get_or<size_t>(root, "batch_size", cfg.batch_size, "config");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  cfg.mode = parse_mode(get_or<std::string>(root, "mode", "pipelined", "config"));
  cfg.exec.host_workers = get_or<size_t>(root, "host_workers", cfg.exec.host_workers, "config");
  cfg.queue_depth = get_or<size_t>(root, "queue_depth", cfg.queue_depth, "config");
  cfg.staging_dir = resolve(base_dir, get_or<std::string>(root, "staging_dir", "staging", "config"));
  if (root.contains("device")) {
    const auto& d = root.at("device");
    reject_unknown(d, {"memory_bytes", "pool_bytes", "lanes_per_group", "groups", "h2d_bytes_per_sec",
                       "launch_overhead_us", "fused"},
                   "device");
    cfg.device_memory_bytes = get_or<uint64_t>(d, "memory_bytes", cfg.device_memory_bytes, "device");
    cfg.exec.pool_bytes = get_or<uint64_t>(d, "pool_bytes", cfg.exec.pool_bytes, "device");
    cfg.exec.lanes_per_group = get_or<size_t>(d, "lanes_per_group", cfg.exec.lanes_per_group, "device");
    cfg.exec.device_groups = get_or<size_t>(d, "groups", cfg.exec.device_groups, "device");
    cfg.exec.h2d_bytes_per_sec = get_or<double>(d, "h2d_bytes_per_sec", cfg.exec.h2d_bytes_per_sec, "device");
    cfg.exec.launch_overhead_us = get_or<double>(d, "launch_overhead_us", cfg.exec.launch_overhead_us, "device");
    cfg.exec.fused = get_or<bool>(d, "fused", cfg.exec.fused, "device");
  }
  if (cfg.device_memory_bytes == 0) throw ConfigError("device.memory_bytes must be positive");
  if (cfg.exec.lanes_per_group == 0) throw ConfigError("device.lanes_per_group must be positive");
  if (cfg.exec.pool_bytes == 0 || cfg.exec.pool_bytes % 128 != 0) {
    throw ConfigError("device.pool_bytes must be a positive multiple of 128");
  }
  if (!(cfg.exec.h2d_bytes_per_sec > 0) || !(cfg.exec.launch_overhead_us > 0)) {
    throw ConfigError("device bandwidth and launch overhead must be positive");
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

opgraph::LayerPlan build_plan(const PipelineConfig& config) {
  std::vector<featureops::OperatorSpec> specs = config.operators;
  for (auto& op : specs) {
    auto raise = [&](featureops::FunctionRef& ref, bool body) {
      auto intrinsic = featureops::intrinsic_footprint(ref, config.base_dir);
      if (!intrinsic) return;
      uint64_t current = ref.footprint_bytes.value_or(op.footprint_bytes);
      if (body) op.footprint_bytes = std::max(op.footprint_bytes, *intrinsic);
      else ref.footprint_bytes = std::max(current, *intrinsic);
    };
    raise(op.body, true);
    for (auto& c : op.pre_calls) raise(c, false);
    for (auto& c : op.post_calls) raise(c, false);
  }
  auto dag = opgraph::expand_call_graph(specs);
  return opgraph::place_operators(opgraph::layer_schedule(dag), {config.device_memory_bytes});
}

void validate_sources(const PipelineConfig& config) {
  if (config.views.empty()) throw ConfigError("config lists no views");
  if (config.features.empty() && !config.basic) throw ConfigError("config lists no features");
  std::set<std::string> available;
  std::set<std::string> view_names;
  for (size_t i = 0; i < config.views.size(); ++i) {
    const auto& view = config.views[i];
    if (!view_names.insert(view.name).second) throw ConfigError("duplicate view name '" + view.name + "'");
    if (!std::filesystem::exists(view.path)) {
      throw ConfigError("view '" + view.name + "': file '" + view.path.string() + "' not found");
    }
    columnstore::ViewSchema schema;
    try {
      schema = columnstore::schema_of(view.path);
    } catch (const Error& e) {
      throw ConfigError("view '" + view.name + "': " + e.what());
    }
    if (!view.columns.empty()) {
      columnstore::ViewSchema projected;
      for (const auto& c : view.columns) {
        auto idx = schema.index_of(c);
        if (!idx) throw ConfigError("view '" + view.name + "': no column '" + c + "'");
        projected.columns.push_back(schema.columns[*idx]);
      }
      schema.columns = std::move(projected.columns);
    }
    std::vector<columnstore::ColumnDef> cleaned;
    try {
      cleaned = viewpipe::cleaned_columns(schema, view.clean);
    } catch (const Error& e) {
      throw ConfigError("view '" + view.name + "': " + e.what());
    }
    std::set<std::string> mine;
    for (const auto& c : cleaned) mine.insert(c.name);
    if (i == 0) {
      if (!mine.contains(std::string(viewpipe::kInstanceIdColumn))) {
        throw ConfigError("view '" + view.name + "' has no instance_id column");
      }
      if (!mine.contains(config.label_column)) {
        throw ConfigError("view '" + view.name + "' has no label column '" + config.label_column + "'");
      }
      available = mine;
      continue;
    }
    if (view.join_keys.empty()) throw ConfigError("view '" + view.name + "' needs join_keys");
    for (const auto& k : view.join_keys) {
      if (!mine.contains(k) || !available.contains(k)) {
        throw ConfigError("view '" + view.name + "': join key '" + k + "' missing on one side");
      }
    }
    for (const auto& c : mine) {
      bool key = std::find(view.join_keys.begin(), view.join_keys.end(), c) != view.join_keys.end();
      if (!key && !available.insert(c).second) {
        throw ConfigError("view '" + view.name + "': column '" + c + "' already exists upstream");
      }
    }
  }

  opgraph::LayerPlan plan;
  try {
    plan = build_plan(config);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  std::set<std::string> produced = available;
  for (opgraph::NodeId n : opgraph::topological_order(plan.dag)) {
    const auto& node = plan.dag.nodes[n];
    for (const auto& a : node.call.args) {
      if (!produced.contains(a)) throw ConfigError("operator '" + node.name + "' reads unknown column '" + a + "'");
    }
    if (!node.call.function.empty()) {
      if (!featureops::FunctionLibrary::builtin().contains(node.call.function)) {
        throw ConfigError("operator '" + node.name + "': unknown function '" + node.call.function + "'");
      }
      if (available.contains(node.call.out)) {
        throw ConfigError("operator '" + node.name + "' overwrites view column '" + node.call.out + "'");
      }
    }
    for (const auto& w : node.writes) produced.insert(w);
  }
  std::set<std::string> seen;
  for (const auto& f : config.features) {
    if (!produced.contains(f) || available.contains(f)) {
      throw ConfigError("feature '" + f + "' is not produced by any operator");
    }
    if (!seen.insert(f).second) throw ConfigError("feature '" + f + "' listed twice");
  }
  if (config.basic) {
    if (!std::filesystem::exists(config.basic->path)) {
      throw ConfigError("basic feature file '" + config.basic->path.string() + "' not found");
    }
    auto schema = columnstore::schema_of(config.basic->path);
    auto id = schema.index_of(viewpipe::kInstanceIdColumn);
    if (!id || schema.columns[*id].kind != columnstore::ColumnKind::kInt64) {
      throw ConfigError("basic feature file needs an int64 instance_id column");
    }
    for (const auto& f : config.basic->features) {
      auto idx = schema.index_of(f.column);
      if (!idx || schema.columns[*idx].kind != columnstore::ColumnKind::kInt64) {
        throw ConfigError("basic feature column '" + f.column + "' must exist and be int64");
      }
      if (f.column == viewpipe::kInstanceIdColumn || produced.contains(f.column)) {
        throw ConfigError("basic feature column '" + f.column + "' collides with an extracted column");
      }
    }
    if (schema.row_count != columnstore::schema_of(config.views[0].path).row_count) {
      throw ConfigError("basic feature file must be row-aligned with view '" + config.views[0].name + "'");
    }
  }
}

}  // namespace featurebox::pipeline
