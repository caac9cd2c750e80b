// Copyright 2026 The logrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end driver: ingest -> baseline -> rank statistics -> recommend,
// with per-stage wall-clock timing, artifact writing and the benchmark grid.

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "logrank/baseline.hpp"
#include "logrank/common.hpp"
#include "logrank/config.hpp"
#include "logrank/explain.hpp"
#include "logrank/ingest.hpp"
#include "logrank/rankstats.hpp"
#include "logrank/reader.hpp"
#include "logrank/recommend.hpp"
#include "logrank/report_io.hpp"
#include "logrank/synthgen.hpp"

namespace logrank {

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  InputOptions input;
  AnalysisSpec spec;
  std::filesystem::path out_dir = "logrank-out";
  ReportFormat format = ReportFormat::kJson;
  std::optional<std::string> explain_entity;
  ChartOptions chart;
};

// Applies an analysis config file. Recognised keys: delimiter, header,
// columns, missing_token, categories, entity, p, k, min_support, threads,
// log_scale, max_bars.
inline void apply_config(const KeyValueFile& kv, RunConfig& config) {
  kv.require_known([](const std::string& k) {
    return k == "delimiter" || k == "header" || k == "columns" || k == "missing_token" ||
           k == "categories" || k == "entity" || k == "p" || k == "k" || k == "min_support" ||
           k == "threads" || k == "log_scale" || k == "max_bars";
  });
  if (auto v = kv.get("delimiter")) config.input.mapping.delimiter = parse_delimiter(*v);
  if (auto v = kv.get("header")) config.input.has_header = parse_bool(*v, "header");
  if (auto v = kv.get("columns")) config.input.mapping.column_names = split_list(*v);
  if (auto v = kv.get("missing_token")) config.input.mapping.missing_token = *v;
  if (auto v = kv.get("categories")) config.spec.categories = split_list(*v);
  if (auto v = kv.get("entity")) config.spec.entity_field = *v;
  if (auto v = kv.get("p")) config.spec.p = parse_p(*v);
  if (auto v = kv.get("k")) config.spec.k = parse_number<std::uint32_t>(*v, "k");
  if (auto v = kv.get("min_support")) config.spec.min_support = parse_number<std::uint64_t>(*v, "min_support");
  if (auto v = kv.get("threads")) config.input.threads = parse_number<unsigned>(*v, "threads");
  if (auto v = kv.get("log_scale")) config.chart.log_scale = parse_bool(*v, "log_scale");
  if (auto v = kv.get("max_bars")) config.chart.max_bars = parse_number<std::size_t>(*v, "max_bars");
}

struct StageTimes {
  double ingest = 0;
  double baseline = 0;
  double rankstats = 0;
  double recommend = 0;
  double wall = 0;  // first byte read to last report built

  // End-to-end time to discovery.
  double e2e() const { return ingest + baseline + rankstats + recommend; }
};

struct PipelineResult {
  Aggregate aggregate;
  BaselineSet baseline;
  std::vector<EntityBaselineStats> stats;
  std::vector<EntityAnomalyReport> reports;
  StageTimes times;
  unsigned threads = 1;

  ReportContext context(const AnalysisSpec& spec) const {
    return {spec.categories, spec.entity_field, spec.k, spec.min_support};
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void check_totals(const Aggregate& a) {
  const auto& index = a.index;
  std::uint64_t cells = 0;
  for (std::size_t i = 0; i < index.size(); ++i) cells += index.combination_total(i);
  if (cells != index.total_records() || a.marginals.total_records() != index.total_records()) {
    throw InvariantError("record totals do not reconcile between marginals and index");
  }
  for (std::size_t j = 0; j < a.marginals.categories().size(); ++j) {
    std::uint64_t sum = 0;
    for (const auto& [v, n] : a.marginals.counts(j)) sum += n;
    if (sum != index.total_records()) {
      throw InvariantError("marginal total of '" + a.marginals.categories()[j] + "' does not reconcile");
    }
  }
}

}  // namespace detail

inline void finalize(RunConfig& config) {
  config.spec.broadcast_p();
  config.spec.validate();
  if (config.inputs.empty()) throw ConfigError("no input files given");
}

// Runs every analysis stage in memory. Output depends only on the input
// bytes and the analysis settings, never on the thread count.
inline PipelineResult run_analysis(RunConfig config) {
  finalize(config);
  PipelineResult result;
  result.threads = resolve_threads(config.input.threads);
  config.input.threads = result.threads;
  detail::Stopwatch total;
  detail::Stopwatch stage;

  result.aggregate = ingest_files(config.inputs, config.spec, config.input);
  detail::check_totals(result.aggregate);
  if (result.aggregate.index.empty()) {
    throw InputError("the log contains no accepted records (" +
                     std::to_string(result.aggregate.index.rejected_records()) + " rejected)");
  }
  result.times.ingest = stage.lap();

  result.baseline = generate_baseline(result.aggregate.marginals, config.spec);
  result.times.baseline = stage.lap();

  const auto& index = result.aggregate.index;
  const RankTable ranks(index, result.threads);
  result.stats = compute_all_mrr(result.baseline, ranks, result.threads);
  for (const auto& s : result.stats) {
    if (s.mrr && !(*s.mrr > 0.0 && *s.mrr <= 1.0)) {
      throw InvariantError("MRR of '" + s.entity + "' is outside (0, 1]");
    }
  }
  const DistanceTable table = compute_distances(std::span<const EntityBaselineStats>(result.stats),
                                                ranks, result.baseline, config.spec.min_support);
  result.times.rankstats = stage.lap();

  result.reports.resize(index.entities().size());
  parallel_for(result.reports.size(), result.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      result.reports[e] = top_k(index.entities()[e], table, config.spec.k);
    }
  });
  result.times.recommend = stage.lap();
  result.times.wall = total.lap();
  return result;
}

enum class Command { kDiscover, kRecommend, kExplain };

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw InputError("cannot write '" + path.string() + "'");
}

inline std::string ttd_summary(const PipelineResult& r) {
  char buf[256];
  const double e2e = r.times.e2e();
  std::snprintf(buf, sizeof buf,
                "e2e_ttd=%.3fs ingest=%.3fs baseline=%.3fs rankstats=%.3fs recommend=%.3fs "
                "records=%llu rejected=%llu threads=%u throughput=%.0f entries/s",
                e2e, r.times.ingest, r.times.baseline, r.times.rankstats, r.times.recommend,
                static_cast<unsigned long long>(r.aggregate.index.total_records()),
                static_cast<unsigned long long>(r.aggregate.index.rejected_records()), r.threads,
                e2e > 0 ? static_cast<double>(r.aggregate.index.total_records()) / e2e : 0.0);
  return buf;
}

// Runs the analysis and writes the artifacts of `command` into out_dir:
// baseline.json always, reports.json (and reports.csv with the csv format)
// for recommend and explain, and <entity>/ charts for explain.
inline PipelineResult run_pipeline(const RunConfig& config, Command command, std::ostream& log) {
  if (command == Command::kExplain && !config.explain_entity) {
    throw ConfigError("explain needs an entity");
  }
  PipelineResult result = run_analysis(config);
  RunConfig resolved = config;
  resolved.spec.broadcast_p();
  std::filesystem::create_directories(config.out_dir);
  write_text(config.out_dir / "baseline.json",
             baseline_to_json(result.baseline, result.aggregate.marginals, resolved.spec,
                              result.aggregate.index.rejected_records())
                     .dump(2) +
                 "\n");
  if (command != Command::kDiscover) {
    const auto context = result.context(resolved.spec);
    write_text(config.out_dir / "reports.json", emit_report(result.reports, ReportFormat::kJson, context));
    if (config.format == ReportFormat::kCsv) {
      write_text(config.out_dir / "reports.csv", emit_report(result.reports, ReportFormat::kCsv, context));
    }
  }
  if (command == Command::kExplain) {
    const auto& entity = *config.explain_entity;
    const auto id = result.aggregate.index.entity_id(entity);
    if (!id) throw InputError("entity '" + entity + "' does not occur in the log");
    const auto bundle = explain(entity, result.reports[*id], result.aggregate.index, result.baseline);
    const auto dir = write_explanation(bundle, config.out_dir, config.chart);
    log << "wrote " << bundle.baseline_charts.size() << " baseline and "
        << bundle.anomaly_charts.size() << " anomaly charts to " << dir.string() << "\n";
  }
  log << ttd_summary(result) << "\n";
  return result;
}

struct BenchResult {
  std::uint64_t size = 0;  // requested entries (0 when inputs were supplied)
  unsigned threads = 1;
  std::uint64_t total_records = 0;
  StageTimes times;
  double throughput = 0;  // accepted entries per second of E2E time
  double speedup = 1;     // E2E time at the reference thread count / this one
};

struct BenchOptions {
  std::vector<std::uint64_t> sizes{1'000'000};
  std::vector<unsigned> threads{1, 2, 4};
  std::filesystem::path work_dir = "logrank-bench";
  std::uint64_t seed = 1;
  std::size_t entities = 128;
  std::vector<std::size_t> cardinalities{6, 24, 12, 8};
  std::vector<std::filesystem::path> inputs;  // when set, sizes are ignored
  RunConfig base;                             // analysis settings for supplied inputs
  bool keep_logs = false;
};

inline GeneratorConfig bench_generator(const BenchOptions& options, std::uint64_t size) {
  return make_zipf_config(options.seed, options.cardinalities, options.entities, size);
}

// Runs the size x threads grid. Speedup is relative to 1 thread when it is in
// the grid, otherwise to the first thread count listed. Throws if reports
// differ between thread counts.
inline std::vector<BenchResult> run_bench(const BenchOptions& options, std::ostream* progress = nullptr) {
  if (options.threads.empty()) throw ConfigError("bench needs at least one thread count");
  std::filesystem::create_directories(options.work_dir);
  std::vector<BenchResult> rows;

  std::vector<std::uint64_t> sizes = options.sizes;
  if (!options.inputs.empty()) sizes = {0};
  for (const auto size : sizes) {
    RunConfig config = options.base;
    std::filesystem::path generated;
    if (options.inputs.empty()) {
      const auto gen = bench_generator(options, size);
      generated = options.work_dir / ("bench-" + std::to_string(size) + ".log");
      generate_log(gen, generated);
      config.inputs = {generated};
      config.input = InputOptions{};
      config.spec = AnalysisSpec{};
      for (const auto& c : gen.categories) config.spec.categories.push_back(c.name);
      config.spec.entity_field = gen.entity_field;
    } else {
      config.inputs = options.inputs;
    }

    std::optional<std::string> reference_bytes;
    double reference_time = 0;
    const unsigned reference_threads =
        std::find(options.threads.begin(), options.threads.end(), 1u) != options.threads.end()
            ? 1u
            : options.threads.front();
    std::vector<BenchResult> size_rows;
    for (const unsigned t : options.threads) {
      config.input.threads = t;
      const auto result = run_analysis(config);
      const auto bytes = emit_report(result.reports, ReportFormat::kJson);
      if (!reference_bytes) {
        reference_bytes = bytes;
      } else if (bytes != *reference_bytes) {
        throw InvariantError("reports differ between thread counts");
      }
      BenchResult row;
      row.size = size;
      row.threads = result.threads;
      row.total_records = result.aggregate.index.total_records();
      row.times = result.times;
      row.throughput = static_cast<double>(row.total_records) / result.times.e2e();
      if (t == reference_threads) reference_time = result.times.e2e();
      size_rows.push_back(row);
      if (progress != nullptr) *progress << "size=" << size << " " << ttd_summary(result) << "\n";
    }
    for (auto& row : size_rows) {
      row.speedup = reference_time / row.times.e2e();
      rows.push_back(row);
    }
    if (!generated.empty() && !options.keep_logs) std::filesystem::remove(generated);
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchResult>& rows) {
  std::string out =
      "size,threads,total_records,ingest_s,baseline_s,rankstats_s,recommend_s,e2e_s,wall_s,"
      "throughput_eps,speedup\n";
  for (const auto& r : rows) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%llu,%u,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.1f,%.4f\n",
                  static_cast<unsigned long long>(r.size), r.threads,
                  static_cast<unsigned long long>(r.total_records), r.times.ingest,
                  r.times.baseline, r.times.rankstats, r.times.recommend, r.times.e2e(),
                  r.times.wall, r.throughput, r.speedup);
    out += buf;
  }
  return out;
}

// Synthetic-log config. Keys:
//   seed, entries, entities (count), entity_field, zipf_exponent,
//   categories = name:cardinality,...   values.<name> = v1,v2,...
//   weights.<name> = w1,w2,...          entity_weights = w1,w2,...
//   missing_rate, malformed_rate, delimiter,
//   plant = entity|value_1|...|value_m|inflation   (repeatable)
inline GeneratorConfig generator_config_from(const KeyValueFile& kv) {
  kv.require_known([](const std::string& k) {
    return k == "seed" || k == "entries" || k == "entities" || k == "entity_field" ||
           k == "zipf_exponent" || k == "categories" || k == "missing_rate" ||
           k == "malformed_rate" || k == "delimiter" || k == "plant" || k == "entity_weights" ||
           k.starts_with("values.") || k.starts_with("weights.");
  });
  const double exponent = kv.get("zipf_exponent") ? parse_real(*kv.get("zipf_exponent"), "zipf_exponent") : 1.0;
  std::vector<std::string> names;
  std::vector<std::size_t> cardinalities;
  for (const auto& item : split_list(kv.get("categories").value_or(""))) {
    const auto colon = item.find(':');
    names.push_back(item.substr(0, colon));
    cardinalities.push_back(colon == std::string::npos
                                ? 0
                                : parse_number<std::size_t>(item.substr(colon + 1), "cardinality"));
  }
  if (names.empty()) throw ConfigError(kv.origin() + ": 'categories' is required");
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (auto v = kv.get("values." + names[j])) cardinalities[j] = split_list(*v).size();
    if (cardinalities[j] == 0) throw ConfigError("category '" + names[j] + "' has no cardinality");
  }
  const auto entity_count =
      parse_number<std::size_t>(kv.get("entities").value_or("64"), "entities");
  GeneratorConfig config = make_zipf_config(
      parse_number<std::uint64_t>(kv.get("seed").value_or("1"), "seed"), cardinalities,
      entity_count, parse_number<std::uint64_t>(kv.get("entries").value_or("10000"), "entries"),
      exponent);
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto& c = config.categories[j];
    c.name = names[j];
    if (auto v = kv.get("values." + names[j])) c.values = split_list(*v);
    if (auto v = kv.get("weights." + names[j])) {
      c.weights.clear();
      for (const auto& w : split_list(*v)) c.weights.push_back(parse_real(w, "weight"));
    }
  }
  if (auto v = kv.get("entity_weights")) {
    config.entity_weights.clear();
    for (const auto& w : split_list(*v)) config.entity_weights.push_back(parse_real(w, "entity weight"));
  }
  if (auto v = kv.get("entity_field")) config.entity_field = *v;
  if (auto v = kv.get("missing_rate")) config.missing_rate = parse_real(*v, "missing_rate");
  if (auto v = kv.get("malformed_rate")) config.malformed_rate = parse_real(*v, "malformed_rate");
  if (auto v = kv.get("delimiter")) config.delimiter = parse_delimiter(*v);
  for (const auto& plant : kv.get_all("plant")) {
    auto parts = split_list(plant, '|');
    if (parts.size() != names.size() + 2) {
      throw ConfigError("plant '" + plant + "' needs entity|" + std::to_string(names.size()) +
                        " values|inflation");
    }
    PlantSpec spec;
    spec.entity = parts.front();
    spec.inflation = parse_real(parts.back(), "inflation");
    spec.combination.assign(parts.begin() + 1, parts.end() - 1);
    config.plants.push_back(std::move(spec));
  }
  config.validate();
  return config;
}

}  // namespace logrank
