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

#include "featurebox/pipeline/runner.h"

#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "featurebox/common/bounded_queue.h"
#include "featurebox/columnstore/fbxc.h"
#include "featurebox/featureops/frame.h"
#include "featurebox/featureops/kernels.h"
#include "featurebox/viewpipe/join.h"

namespace featurebox::pipeline {

using columnstore::ColumnBatch;
using columnstore::ColumnKind;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<std::string> wanted_columns(const ViewSource& view) {
  if (!view.columns.empty()) return view.columns;
  std::vector<std::string> out;
  for (const auto& c : columnstore::schema_of(view.path).columns) out.push_back(c.name);
  return out;
}

std::vector<std::string> basic_columns(const BasicSource& basic) {
  std::vector<std::string> out{std::string(viewpipe::kInstanceIdColumn)};
  for (const auto& f : basic.features) out.push_back(f.column);
  return out;
}

FeatureLayout layout_of(const PipelineConfig& config) {
  FeatureLayout layout;
  layout.sign_lists = config.features;
  if (config.basic) layout.basic = config.basic->features;
  return layout;
}

// Runs the operator plan over joined rows and keeps what training needs:
// instance_id, the label and the feature sign lists.
class Extractor {
 public:
  Extractor(const PipelineConfig& config, const opgraph::LayerPlan& plan, device::ExecContext& ctx)
      : config_(config),
        executor_(plan, device::PlanExecutor::bind_kernels(plan, featureops::FunctionLibrary::builtin(), config.base_dir),
                  ctx) {
    std::vector<columnstore::ColumnDef> defs{{std::string(viewpipe::kInstanceIdColumn), ColumnKind::kInt64},
                                             {config.label_column, ColumnKind::kInt64}};
    for (const auto& f : config.features) defs.push_back({f, ColumnKind::kUtf8});
    schema_.columns = std::move(defs);
  }

  const columnstore::ViewSchema& schema() const { return schema_; }

  ColumnBatch extract(const ColumnBatch& joined) {
    if (joined.row_count() == 0) return ColumnBatch::empty(schema_);
    auto frame = featureops::FeatureFrame::from_batch(joined);
    executor_.run(frame);
    std::vector<columnstore::Column> cols{joined.column(std::string(viewpipe::kInstanceIdColumn)),
                                          joined.column(config_.label_column)};
    for (const auto& f : config_.features) {
      if (frame.at(f).kind() != featureops::FrameKind::kSigns) {
        throw SchemaError("feature '" + f + "' is not a sign list");
      }
      cols.push_back(frame.to_column(f));
    }
    return ColumnBatch(std::move(cols), {});
  }

 private:
  const PipelineConfig& config_;
  device::PlanExecutor executor_;
  columnstore::ViewSchema schema_;
};

ColumnBatch join_all(ColumnBatch rows, const PipelineConfig& config, const std::vector<ColumnBatch>& dims) {
  for (size_t i = 0; i < dims.size(); ++i) {
    rows = viewpipe::join_views(rows, dims[i], {config.views[i + 1].join_keys});
  }
  return rows;
}

ColumnBatch merge(const ColumnBatch& extracted, const std::optional<ColumnBatch>& basic) {
  return basic ? viewpipe::merge_features(extracted, *basic) : extracted;
}

// Emits and sinks every full batch; `last` also flushes the remainder.
class Emitter {
 public:
  Emitter(const PipelineConfig& config, const BatchObserver& observer)
      : config_(config), layout_(layout_of(config)), rebatcher_(config.batch_size), observer_(observer) {}

  void add(ColumnBatch rows) {
    for (auto& b : rebatcher_.add(std::move(rows))) emit(b);
  }
  void finish() {
    if (auto rest = rebatcher_.flush()) emit(*rest);
  }
  const SinkStats& stats() const { return sink_.stats(); }

 private:
  void emit(const ColumnBatch& rows) {
    try {
      auto batch = emit_minibatch(rows, config_.label_column, layout_);
      sink_.consume(batch);
      if (observer_) observer_(batch);
    } catch (const std::exception& e) {
      throw PipelineError("sink", sink_.stats().batches, e.what());
    }
  }

  const PipelineConfig& config_;
  FeatureLayout layout_;
  Rebatcher rebatcher_;
  TrainingSink sink_;
  const BatchObserver& observer_;
};

// First failure wins; later ones are consequences of the cancellation.
class FailureSlot {
 public:
  void record(std::exception_ptr e) {
    std::lock_guard lock(mu_);
    if (!error_) error_ = e;
  }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

struct Chunk {
  uint64_t index = 0;
  ColumnBatch batch;
};

}  // namespace

RunReport run_pipelined(const PipelineConfig& config, const BatchObserver& observer) {
  validate_sources(config);
  const auto started = Clock::now();
  RunReport report;
  report.mode = Mode::kPipelined;
  device::ExecContext ctx(config.exec);
  Extractor extractor(config, build_plan(config), ctx);

  double clean_s = 0, read_s = 0, join_s = 0, extract_s = 0, merge_s = 0, sink_s = 0;
  std::vector<ColumnBatch> dims;
  for (size_t i = 1; i < config.views.size(); ++i) {
    const auto& view = config.views[i];
    auto t = Clock::now();
    auto wanted = wanted_columns(view);
    auto raw = columnstore::read_columns(view.path, wanted);
    report.input_bytes_read += raw.bytes_read;
    read_s += seconds_since(t);
    t = Clock::now();
    auto cleaned = viewpipe::clean_views(raw.batch, view.clean);
    report.clean += cleaned.stats;
    dims.push_back(std::move(cleaned.batch));
    clean_s += seconds_since(t);
  }

  const ViewSource& driver = config.views[0];
  columnstore::ViewReader reader(driver.path, wanted_columns(driver));
  std::optional<columnstore::ViewReader> basic_reader;
  if (config.basic) basic_reader.emplace(config.basic->path, basic_columns(*config.basic));
  const uint64_t rows = reader.row_count();
  const uint64_t step = config.batch_size;
  const size_t depth = config.queue_depth;

  BoundedQueue<Chunk> read_q(depth), clean_q(depth), join_q(depth), extract_q(depth), basic_q(depth),
      merged_q(depth);
  FailureSlot failure;
  auto cancel_all = [&] {
    for (auto* q : {&read_q, &clean_q, &join_q, &extract_q, &basic_q, &merged_q}) q->cancel();
  };
  auto fail = [&](const char* stage, uint64_t index) {
    try {
      throw;
    } catch (const PipelineError&) {
      failure.record(std::current_exception());
    } catch (const std::exception& e) {
      failure.record(std::make_exception_ptr(PipelineError(stage, index, e.what())));
    }
    cancel_all();
  };

  // Source: row ranges of the driving view.
  auto read_ranges = [&](columnstore::ViewReader& r, BoundedQueue<Chunk>& out, double& busy, const char* stage) {
    uint64_t index = 0;
    try {
      for (uint64_t begin = 0; begin < rows; begin += step, ++index) {
        auto t = Clock::now();
        Chunk c{index, r.read(columnstore::RowRange{begin, std::min(rows, begin + step)})};
        busy += seconds_since(t);
        if (!out.push(std::move(c))) return;
      }
      out.close();
    } catch (...) {
      fail(stage, index);
    }
  };
  // One-in, one-out transform stage.
  auto transform = [&](BoundedQueue<Chunk>& in, BoundedQueue<Chunk>& out, double& busy, const char* stage,
                       const std::function<ColumnBatch(Chunk&)>& fn) {
    uint64_t index = 0;
    try {
      while (auto c = in.pop()) {
        index = c->index;
        auto t = Clock::now();
        Chunk next{c->index, fn(*c)};
        busy += seconds_since(t);
        if (!out.push(std::move(next))) return;
      }
      out.close();
    } catch (...) {
      fail(stage, index);
    }
  };

  double basic_read_s = 0;
  std::vector<std::thread> threads;
  threads.emplace_back([&] { read_ranges(reader, read_q, read_s, "read"); });
  if (basic_reader) threads.emplace_back([&] { read_ranges(*basic_reader, basic_q, basic_read_s, "read_basic"); });
  threads.emplace_back([&] {
    transform(read_q, clean_q, clean_s, "clean", [&](Chunk& c) {
      auto result = viewpipe::clean_views(c.batch, driver.clean);
      report.clean += result.stats;
      return std::move(result.batch);
    });
  });
  threads.emplace_back([&] {
    transform(clean_q, join_q, join_s, "join", [&](Chunk& c) {
      auto joined = join_all(std::move(c.batch), config, dims);
      report.joined_rows += joined.row_count();
      return joined;
    });
  });
  threads.emplace_back(
      [&] { transform(join_q, extract_q, extract_s, "extract", [&](Chunk& c) { return extractor.extract(c.batch); }); });
  threads.emplace_back([&] {
    transform(extract_q, merged_q, merge_s, "merge", [&](Chunk& c) {
      std::optional<ColumnBatch> basic;
      if (basic_reader) {
        auto b = basic_q.pop();
        if (!b || b->index != c.index) throw Error("basic feature track is out of step");
        basic = std::move(b->batch);
      }
      auto merged = merge(c.batch, basic);
      report.merged_rows += merged.row_count();
      return merged;
    });
  });

  Emitter emitter(config, observer);
  try {
    while (auto c = merged_q.pop()) {
      auto t = Clock::now();
      emitter.add(std::move(c->batch));
      sink_s += seconds_since(t);
    }
    auto t = Clock::now();
    emitter.finish();
    sink_s += seconds_since(t);
  } catch (...) {
    fail("sink", emitter.stats().batches);
  }
  for (auto& th : threads) th.join();
  failure.rethrow();

  report.input_bytes_read += reader.bytes_read() + (basic_reader ? basic_reader->bytes_read() : 0);
  report.stage_seconds = {{"read", read_s + basic_read_s}, {"clean", clean_s}, {"join", join_s},
                          {"extract", extract_s}, {"merge", merge_s}, {"sink", sink_s}};
  report.device = ctx.counters();
  report.sink = emitter.stats();
  report.wall_seconds = seconds_since(started);
  return report;
}

RunReport run_staged(const PipelineConfig& config, const BatchObserver& observer) {
  validate_sources(config);
  const auto started = Clock::now();
  RunReport report;
  report.mode = Mode::kStaged;
  device::ExecContext ctx(config.exec);
  Extractor extractor(config, build_plan(config), ctx);

  const auto stage1 = config.staging_dir / "stage1_clean";
  const auto stage2 = config.staging_dir / "stage2_join";
  const auto stage3 = config.staging_dir / "stage3_extract";
  try {
    for (const auto& dir : {stage1, stage2, stage3}) {
      std::filesystem::remove_all(dir);
      std::filesystem::create_directories(dir);
    }
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError(std::string("cannot prepare staging directory: ") + e.what());
  }
  auto materialize = [&](const ColumnBatch& batch, const std::filesystem::path& path) {
    auto file = columnstore::write_view(batch, path);
    report.intermediate_bytes_written += file.file_bytes;
    report.intermediate_files += 1;
  };
  auto staged = [&](const char* stage, uint64_t index, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw PipelineError(stage, index, e.what());
    }
  };

  // Stage 1: clean every view and write it out.
  auto t = Clock::now();
  std::vector<std::filesystem::path> cleaned_paths;
  for (size_t i = 0; i < config.views.size(); ++i) {
    const auto& view = config.views[i];
    staged("clean", i, [&] {
      auto raw = columnstore::read_columns(view.path, wanted_columns(view));
      report.input_bytes_read += raw.bytes_read;
      auto cleaned = viewpipe::clean_views(raw.batch, view.clean);
      report.clean += cleaned.stats;
      cleaned_paths.push_back(stage1 / (view.name + ".fbxc"));
      materialize(cleaned.batch, cleaned_paths.back());
    });
  }
  double clean_s = seconds_since(t);

  // Stage 2: read the cleaned views back and join them.
  t = Clock::now();
  const auto joined_path = stage2 / "joined.fbxc";
  staged("join", 0, [&] {
    auto read_all = [&](const std::filesystem::path& p) {
      std::vector<std::string> names;
      for (const auto& c : columnstore::schema_of(p).columns) names.push_back(c.name);
      auto r = columnstore::read_columns(p, names);
      return std::move(r.batch);
    };
    std::vector<ColumnBatch> dims;
    for (size_t i = 1; i < cleaned_paths.size(); ++i) dims.push_back(read_all(cleaned_paths[i]));
    auto joined = join_all(read_all(cleaned_paths[0]), config, dims);
    report.joined_rows = joined.row_count();
    materialize(joined, joined_path);
  });
  double join_s = seconds_since(t);

  // Stage 3: extract features chunk by chunk, write the full result.
  t = Clock::now();
  const auto extracted_path = stage3 / "extracted.fbxc";
  {
    std::vector<std::string> names;
    for (const auto& c : columnstore::schema_of(joined_path).columns) names.push_back(c.name);
    columnstore::ViewReader reader(joined_path, names);
    std::vector<ColumnBatch> parts;
    uint64_t index = 0;
    for (uint64_t begin = 0; begin < reader.row_count(); begin += config.batch_size, ++index) {
      staged("extract", index, [&] {
        auto rows = reader.read(columnstore::RowRange{begin, std::min(reader.row_count(), begin + config.batch_size)});
        parts.push_back(extractor.extract(rows));
      });
    }
    staged("extract", index, [&] {
      materialize(parts.empty() ? ColumnBatch::empty(extractor.schema()) : ColumnBatch::concat(parts), extracted_path);
    });
  }
  double extract_s = seconds_since(t);

  // Stage 4: merge with basic features and feed the sink.
  t = Clock::now();
  ColumnBatch merged;
  staged("merge", 0, [&] {
    std::vector<std::string> names;
    for (const auto& c : extractor.schema().columns) names.push_back(c.name);
    auto extracted = columnstore::read_columns(extracted_path, names).batch;
    std::optional<ColumnBatch> basic;
    if (config.basic) {
      auto b = columnstore::read_columns(config.basic->path, basic_columns(*config.basic));
      report.input_bytes_read += b.bytes_read;
      basic = std::move(b.batch);
    }
    merged = merge(extracted, basic);
    report.merged_rows = merged.row_count();
  });
  double merge_s = seconds_since(t);

  t = Clock::now();
  Emitter emitter(config, observer);
  emitter.add(std::move(merged));
  emitter.finish();
  double sink_s = seconds_since(t);

  report.stage_seconds = {{"clean", clean_s}, {"join", join_s}, {"extract", extract_s},
                          {"merge", merge_s}, {"sink", sink_s}};
  report.device = ctx.counters();
  report.sink = emitter.stats();
  report.wall_seconds = seconds_since(started);
  return report;
}

RunReport run(const PipelineConfig& config, const BatchObserver& observer) {
  return config.mode == Mode::kStaged ? run_staged(config, observer) : run_pipelined(config, observer);
}

std::string RunReport::to_text() const {
  char digest_hex[19];
  std::snprintf(digest_hex, sizeof(digest_hex), "0x%016llx", static_cast<unsigned long long>(sink.digest));
  std::ostringstream out;
  out << "FeatureBox run (" << mode_name(mode) << ")\n";
  out << "  instances " << sink.instances << " in " << sink.batches << " batches, " << sink.signs << " signs\n";
  out << "  digest " << digest_hex << "\n";
  out << "  cleaning dropped " << clean.malformed_rows << " malformed and " << clean.filtered_rows
      << " filtered rows\n";
  out << "  intermediate files " << intermediate_files << ", " << intermediate_bytes_written << " bytes\n";
  out << "  device launches " << device.launches << " for " << device.device_ops << " device operators, "
      << device.launch_overhead_us << " us simulated overhead\n";
  out << "  h2d " << device.bytes_transferred << " bytes, " << device.transfer_us << " us simulated\n";
  out << "  wall " << wall_seconds << " s\n";
  for (const auto& [stage, s] : stage_seconds) out << "    " << stage << " " << s << " s\n";
  out << "\n[values]\n";
  out << "mode=" << mode_name(mode) << "\n";
  out << "batches=" << sink.batches << "\n";
  out << "instances=" << sink.instances << "\n";
  out << "signs=" << sink.signs << "\n";
  out << "digest=" << digest_hex << "\n";
  out << "intermediate_bytes_written=" << intermediate_bytes_written << "\n";
  out << "intermediate_files=" << intermediate_files << "\n";
  out << "input_bytes_read=" << input_bytes_read << "\n";
  out << "malformed_rows=" << clean.malformed_rows << "\n";
  out << "filtered_rows=" << clean.filtered_rows << "\n";
  out << "joined_rows=" << joined_rows << "\n";
  out << "merged_rows=" << merged_rows << "\n";
  out << "launches=" << device.launches << "\n";
  out << "device_ops=" << device.device_ops << "\n";
  out << "simulated_launch_overhead_us=" << device.launch_overhead_us << "\n";
  out << "h2d_bytes=" << device.bytes_transferred << "\n";
  out << "simulated_h2d_us=" << device.transfer_us << "\n";
  out << "wall_seconds=" << wall_seconds << "\n";
  for (const auto& [stage, s] : stage_seconds) out << "stage_seconds." << stage << "=" << s << "\n";
  return out.str();
}

std::vector<std::pair<std::string, std::string>> parse_report_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  bool in_block = false;
  while (std::getline(in, line)) {
    if (line == "[values]") {
      in_block = true;
      continue;
    }
    if (!in_block) continue;
    auto eq = line.find('=');
    if (eq != std::string::npos) out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

}  // namespace featurebox::pipeline
