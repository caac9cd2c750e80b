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

// logrank command-line driver.
//
//   logrank discover  --config run.conf --input access.log --out out/
//   logrank recommend --config run.conf --input access.log --out out/ --format csv
//   logrank explain   SK --config run.conf --input access.log --out out/
//   logrank synth     --config synth.conf --out out/
//   logrank bench     --sizes 1000000,10000000 --threads 1,2,4 --out bench/
//
// Exit codes: 0 success, 1 usage error, 2 input error, 3 invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "logrank/logrank.hpp"

namespace {

namespace fs = std::filesystem;

struct AnalysisFlags {
  std::string config;
  std::vector<std::string> inputs;
  std::string out = "logrank-out";
  std::optional<unsigned> threads;
  std::string entity_column;
  std::string categories;
  std::string p;
  std::optional<std::uint32_t> k;
  std::optional<std::uint64_t> min_support;
  std::string delimiter;
  std::string format = "json";
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--config", f.config, "analysis config file (key = value)");
  cmd->add_option("--input", f.inputs, "input log file(s); .gz accepted")->required();
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_option("--entity", f.entity_column, "entity column name");
  cmd->add_option("--categories", f.categories, "comma-separated category columns");
  cmd->add_option("--p", f.p, "top-p values per category: n or n1,n2,...");
  cmd->add_option("--k", f.k, "recommendations per entity");
  cmd->add_option("--min-support", f.min_support, "minimum entries of a non-baseline combination");
  cmd->add_option("--delimiter", f.delimiter, "field delimiter: a character, 'tab' or 'comma'");
  cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
}

logrank::RunConfig build_run_config(const AnalysisFlags& f) {
  logrank::RunConfig config;
  if (!f.config.empty()) logrank::apply_config(logrank::KeyValueFile::load(f.config), config);
  for (const auto& in : f.inputs) config.inputs.emplace_back(in);
  config.out_dir = f.out;
  if (f.threads) config.input.threads = *f.threads;
  if (!f.entity_column.empty()) config.spec.entity_field = f.entity_column;
  if (!f.categories.empty()) config.spec.categories = logrank::split_list(f.categories);
  if (!f.p.empty()) config.spec.p = logrank::parse_p(f.p);
  if (f.k) config.spec.k = *f.k;
  if (f.min_support) config.spec.min_support = *f.min_support;
  if (!f.delimiter.empty()) config.input.mapping.delimiter = logrank::parse_delimiter(f.delimiter);
  config.format = f.format == "csv" ? logrank::ReportFormat::kCsv : logrank::ReportFormat::kJson;
  return config;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const auto& v : logrank::split_list(s)) out.push_back(logrank::parse_number<T>(v, what));
  if (out.empty()) throw logrank::ConfigError(std::string("empty ") + what + " list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logrank: rank-statistics discovery of abnormal categorical combinations in access logs"};
  app.require_subcommand(1);

  AnalysisFlags discover_flags;
  auto* discover = app.add_subcommand("discover", "discover the baseline combinations");
  add_analysis_flags(discover, discover_flags);

  AnalysisFlags recommend_flags;
  auto* recommend = app.add_subcommand("recommend", "rank and recommend abnormal combinations");
  add_analysis_flags(recommend, recommend_flags);

  AnalysisFlags explain_flags;
  std::string explain_entity;
  auto* explain = app.add_subcommand("explain", "write rank-ordering charts for one entity");
  explain->add_option("entity_value", explain_entity, "entity to explain")->required();
  add_analysis_flags(explain, explain_flags);

  std::string synth_config;
  std::string synth_out = "logrank-synth";
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::uint64_t> synth_entries;
  auto* synth = app.add_subcommand("synth", "generate a synthetic log with planted anomalies");
  synth->add_option("--config", synth_config, "generator config file")->required();
  synth->add_option("--out", synth_out, "output directory (synth.log, manifest.json)");
  synth->add_option("--seed", synth_seed, "override the configured seed");
  synth->add_option("--entries", synth_entries, "override the configured entry count");

  std::string bench_sizes = "1000000";
  std::string bench_threads = "1,2,4";
  std::string bench_out = "logrank-bench";
  std::string bench_config;
  std::vector<std::string> bench_inputs;
  std::uint64_t bench_seed = 1;
  std::size_t bench_entities = 128;
  bool bench_keep = false;
  auto* bench = app.add_subcommand("bench", "time the pipeline over a size x threads grid");
  bench->add_option("--sizes", bench_sizes, "comma-separated synthetic entry counts");
  bench->add_option("--threads", bench_threads, "comma-separated thread counts");
  bench->add_option("--out", bench_out, "output directory (bench.csv)");
  bench->add_option("--config", bench_config, "analysis config, used with --input");
  bench->add_option("--input", bench_inputs, "benchmark these logs instead of synthetic ones");
  bench->add_option("--seed", bench_seed, "generator seed");
  bench->add_option("--entities", bench_entities, "synthetic entity count");
  bench->add_flag("--keep-logs", bench_keep, "keep generated logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (discover->parsed()) {
      logrank::run_pipeline(build_run_config(discover_flags), logrank::Command::kDiscover, std::cout);
    } else if (recommend->parsed()) {
      logrank::run_pipeline(build_run_config(recommend_flags), logrank::Command::kRecommend, std::cout);
    } else if (explain->parsed()) {
      auto config = build_run_config(explain_flags);
      config.explain_entity = explain_entity;
      logrank::run_pipeline(config, logrank::Command::kExplain, std::cout);
    } else if (synth->parsed()) {
      auto config = logrank::generator_config_from(logrank::KeyValueFile::load(synth_config));
      if (synth_seed) config.seed = *synth_seed;
      if (synth_entries) config.total_entries = *synth_entries;
      const fs::path out(synth_out);
      const auto manifest = logrank::generate_log(config, out / "synth.log");
      logrank::write_text(out / "manifest.json", logrank::manifest_to_json(manifest).dump(2) + "\n");
      std::cout << "wrote " << manifest.total_lines << " lines to " << (out / "synth.log").string()
                << "\n";
    } else if (bench->parsed()) {
      logrank::BenchOptions options;
      options.sizes = parse_list<std::uint64_t>(bench_sizes, "sizes");
      options.threads = parse_list<unsigned>(bench_threads, "threads");
      options.work_dir = bench_out;
      options.seed = bench_seed;
      options.entities = bench_entities;
      options.keep_logs = bench_keep;
      for (const auto& in : bench_inputs) options.inputs.emplace_back(in);
      if (!bench_config.empty()) {
        logrank::apply_config(logrank::KeyValueFile::load(bench_config), options.base);
      }
      const auto rows = logrank::run_bench(options, &std::cout);
      const auto csv = logrank::bench_csv(rows);
      logrank::write_text(fs::path(bench_out) / "bench.csv", csv);
      std::cout << csv;
    }
  } catch (const logrank::Error& e) {
    std::cerr << "logrank: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "logrank: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "logrank: internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
