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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "featurebox/common/error.h"
#include "featurebox/common/worker_pool.h"
#include "featurebox/device/cost_model.h"
#include "featurebox/device/executor.h"
#include "featurebox/mempool/arena_pool.h"
#include "featurebox/opgraph/plan.h"
#include "featurebox/pipeline/config.h"
#include "featurebox/pipeline/corpus.h"
#include "featurebox/pipeline/runner.h"

namespace fb = featurebox;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int cmd_run(const std::string& config_path, const std::string& mode, const std::string& report_path) {
  auto config = fb::pipeline::load_config(config_path);
  if (!mode.empty()) config.mode = fb::pipeline::parse_mode(mode);
  if (std::getenv("FEATUREBOX_THREADS") != nullptr) {
    config.exec.host_workers = std::min(config.exec.host_workers, fb::worker_count_from_env(1));
  }
  auto report = fb::pipeline::run(config);
  std::string text = report.to_text();
  std::cout << text;
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::trunc);
    out << text;
    if (!out) throw fb::IoError("cannot write report '" + report_path + "'");
  }
  return 0;
}

int cmd_plan(const std::string& config_path) {
  auto config = fb::pipeline::load_config(config_path);
  auto plan = fb::pipeline::build_plan(config);
  auto metas = fb::device::build_meta_kernels(plan);
  size_t device_ops = 0;
  for (const auto& m : metas) device_ops += m.nodes.size();
  const double overhead = config.exec.launch_overhead_us;

  std::printf("layers %zu\n", plan.layers.size());
  for (size_t i = 0; i < plan.layers.size(); ++i) {
    std::printf("  layer %zu:", i + 1);
    for (auto n : plan.layers[i]) {
      std::printf(" %s[%s]", plan.dag.nodes[n].name.c_str(),
                  std::string(fb::opgraph::placement_name(plan.placement[n])).c_str());
    }
    std::printf("\n");
  }
  std::printf("transfers %zu\n", plan.transfers.size());
  for (const auto& t : plan.transfers) std::printf("  %s at layer %zu\n", t.name.c_str(), t.layer);
  std::printf("predicted launches: fused %zu, unfused %zu\n", metas.size(), device_ops);
  std::printf("simulated launch overhead: fused %.2f us, unfused %.2f us, saving %.2f us\n",
              static_cast<double>(metas.size()) * overhead, static_cast<double>(device_ops) * overhead,
              static_cast<double>(device_ops - metas.size()) * overhead);
  std::printf("\n%s", fb::opgraph::export_plan(plan).c_str());
  return 0;
}

int cmd_bench_launch(std::vector<uint64_t> counts, size_t workers) {
  fb::device::ExecConfig cfg;
  cfg.device_groups = workers;
  cfg.host_workers = 1;
  cfg.pool_bytes = 128 * 1024;
  fb::device::ExecContext ctx(cfg);
  std::vector<fb::device::LaunchMeasurement> measured;
  std::printf("simulated device, empty kernel launches\n");
  std::printf("%10s %14s\n", "launches", "total_us");
  for (uint64_t count : counts) {
    auto start = std::chrono::steady_clock::now();
    for (uint64_t i = 0; i < count; ++i) {
      ctx.grid().launch(1, [](size_t) {});
      ctx.pool().reset();
    }
    double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    measured.push_back({count, us});
    std::printf("%10llu %14.1f\n", static_cast<unsigned long long>(count), us);
  }
  auto fit = fb::device::calibrate_launch_overhead(measured);
  std::printf("fitted per-launch overhead: %.3f us\n\n", fit.per_launch_overhead_us);

  auto reference = fb::device::calibrate_launch_overhead(fb::device::reference_launch_table());
  std::printf("reference accelerator table\n");
  std::printf("%10s %14s\n", "launches", "total_us");
  for (const auto& m : reference.measurements) {
    std::printf("%10llu %14.1f\n", static_cast<unsigned long long>(m.count), m.total_us);
  }
  std::printf("fitted per-launch overhead: %.3f us\n", reference.per_launch_overhead_us);
  return 0;
}

int cmd_bench_alloc(size_t groups, size_t lanes, size_t callers, uint64_t max_size, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<uint64_t>> sizes(groups, std::vector<uint64_t>(lanes));
  uint64_t need = 0;
  for (auto& g : sizes) {
    uint64_t total = 0;
    for (auto& s : g) total += s = rng() % (max_size + 1);
    need += fb::mempool::round_up_128(total);
  }
  fb::mempool::ArenaPool pool(std::max<uint64_t>(128, fb::mempool::round_up_128(need)));
  std::atomic<size_t> next{0};
  auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> threads;
  for (size_t c = 0; c < callers; ++c) {
    threads.emplace_back([&] {
      for (size_t g; (g = next.fetch_add(1)) < groups;) pool.group_allocate(sizes[g]);
    });
  }
  for (auto& t : threads) t.join();
  double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
  std::printf("groups %zu x lanes %zu from %zu callers\n", groups, lanes, callers);
  std::printf("head %llu of expected %llu bytes, %llu head advances\n",
              static_cast<unsigned long long>(pool.head()), static_cast<unsigned long long>(need),
              static_cast<unsigned long long>(pool.head_advances()));
  std::printf("total %.1f us, %.3f us per group allocation\n", us, groups ? us / static_cast<double>(groups) : 0.0);
  auto r0 = std::chrono::steady_clock::now();
  pool.reset();
  double reset_ns = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - r0).count();
  std::printf("reset %.0f ns, head %llu\n", reset_ns, static_cast<unsigned long long>(pool.head()));
  return pool.head() == 0 ? 0 : kExitRuntime;
}

int cmd_gen_corpus(uint64_t instances, size_t views, uint64_t seed, const std::string& out, size_t batch_size) {
  fb::pipeline::CorpusOptions options;
  options.instances = instances;
  options.views = views;
  options.seed = seed;
  options.out = out;
  options.batch_size = batch_size;
  auto manifest = fb::pipeline::generate_corpus(options);
  for (const auto& f : manifest.files) std::printf("wrote %s\n", f.string().c_str());
  std::printf("wrote %s\n", manifest.config.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FeatureBox feature-extraction pipeline"};
  app.require_subcommand(1);

  std::string config_path, mode, report_path;
  auto* run = app.add_subcommand("run", "Run a pipeline config");
  run->add_option("--config", config_path, "Pipeline config (JSON)")->required();
  run->add_option("--mode", mode, "pipelined or staged (default: the config's mode)")
      ->check(CLI::IsMember({"pipelined", "staged"}));
  run->add_option("--report", report_path, "Also write the report here");

  auto* plan = app.add_subcommand("plan", "Print the layered operator plan");
  plan->add_option("--config", config_path, "Pipeline config (JSON)")->required();

  std::vector<uint64_t> counts{1, 10, 100, 1000, 10000};
  size_t launch_workers = 1;
  auto* bench_launch = app.add_subcommand("bench-launch", "Measure simulated launch overhead");
  bench_launch->add_option("--counts", counts, "Launch counts to time")->delimiter(',');
  bench_launch->add_option("--workers", launch_workers, "Device worker threads")->check(CLI::PositiveNumber);

  size_t groups = 1000, lanes = 256, callers = 8;
  uint64_t max_size = 1024, seed = 1;
  auto* bench_alloc = app.add_subcommand("bench-alloc", "Stress the group allocator");
  bench_alloc->add_option("--groups", groups, "Work-groups to allocate");
  bench_alloc->add_option("--lanes", lanes, "Lanes per group")->check(CLI::PositiveNumber);
  bench_alloc->add_option("--callers", callers, "Concurrent callers")->check(CLI::PositiveNumber);
  bench_alloc->add_option("--max-size", max_size, "Largest per-lane request in bytes");
  bench_alloc->add_option("--seed", seed, "Random seed");

  uint64_t instances = 0;
  size_t views = 2, batch_size = 4096;
  std::string out;
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus and pipeline config");
  gen->add_option("--instances", instances, "Impressions to generate")->required();
  gen->add_option("--views", views, "Number of views")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--batch-size", batch_size, "batch_size written into pipeline.json")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, mode, report_path);
    if (*plan) return cmd_plan(config_path);
    if (*bench_launch) return cmd_bench_launch(counts, launch_workers);
    if (*bench_alloc) return cmd_bench_alloc(groups, lanes, callers, max_size, seed);
    if (*gen) return cmd_gen_corpus(instances, views, seed, out, batch_size);
  } catch (const fb::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
