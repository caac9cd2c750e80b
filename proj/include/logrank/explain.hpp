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

// Interpretability output: rank-ordering charts for one entity, one per
// baseline combination it appears in and one per recommended combination,
// rendered as standalone SVG with the entity's position marked.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "logrank/baseline.hpp"
#include "logrank/common.hpp"
#include "logrank/ingest.hpp"
#include "logrank/rankstats.hpp"
#include "logrank/recommend.hpp"
#include "logrank/report_io.hpp"

namespace logrank {

struct ChartData {
  Combination combination;
  std::vector<RankedEntry> series;  // identical to the combination's RankOrdering
  std::uint32_t focal_rank = 0;
  std::string focal_entity;
  bool operator==(const ChartData&) const = default;
};

struct ExplanationBundle {
  std::string entity;
  std::optional<double> mrr;
  std::optional<double> expected_rank;
  std::vector<ChartData> baseline_charts;
  std::vector<ChartData> anomaly_charts;
};

namespace detail {

inline ChartData chart_for(const ContingencyIndex& index, const Combination& combination,
                           std::string_view entity) {
  ChartData chart;
  chart.combination = combination;
  chart.focal_entity = std::string(entity);
  chart.series = rank_ordering(index, combination).entries;
  for (const auto& e : chart.series) {
    if (e.entity == entity) chart.focal_rank = e.rank;
  }
  return chart;
}

}  // namespace detail

inline ExplanationBundle explain(std::string_view entity, const EntityAnomalyReport& report,
                                 const ContingencyIndex& index, const BaselineSet& baseline) {
  if (report.entity != entity) {
    throw ConfigError("report for '" + report.entity + "' does not belong to '" +
                      std::string(entity) + "'");
  }
  if (!index.entity_id(entity)) {
    throw InputError("entity '" + std::string(entity) + "' does not occur in the log");
  }
  ExplanationBundle bundle{std::string(entity), report.mrr, report.expected_rank, {}, {}};
  for (const auto& combination : baseline.combinations) {
    if (index.count(combination, entity) == 0) continue;  // no entries, no chart
    bundle.baseline_charts.push_back(detail::chart_for(index, combination, entity));
  }
  for (const auto& item : report.items) {
    auto chart = detail::chart_for(index, item.combination, entity);
    if (chart.focal_rank != item.rank) {
      throw InvariantError("chart rank disagrees with report for " + to_string(item.combination));
    }
    bundle.anomaly_charts.push_back(std::move(chart));
  }
  return bundle;
}

struct ChartOptions {
  double width = 960;
  double height = 480;
  std::size_t max_bars = 100;
  bool log_scale = false;
};

// Plot geometry shared by the renderer and by anyone checking its output.
struct ChartGeometry {
  double left = 80;
  double right = 24;
  double top = 56;
  double bottom = 64;
  double plot_width = 0;
  double plot_height = 0;
  double slot = 0;  // horizontal space per rank position

  ChartGeometry(const ChartOptions& options, std::size_t cohort) {
    plot_width = options.width - left - right;
    plot_height = options.height - top - bottom;
    slot = plot_width / static_cast<double>(std::max<std::size_t>(cohort, 1));
  }

  // Centre of the slot for a 1-based rank position.
  double x_of_rank(std::uint32_t rank) const { return left + (rank - 0.5) * slot; }
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace detail

inline std::string render_chart(const ChartData& chart, const ChartOptions& options = {}) {
  using detail::num;
  using detail::xml_escape;
  if (chart.series.empty()) throw ConfigError("cannot render an empty series");
  const std::size_t cohort = chart.series.size();
  const ChartGeometry g(options, cohort);

  // Display order: the focal entity leads its group of equal counts, so its
  // slot equals its competition rank.
  std::vector<const RankedEntry*> display;
  display.reserve(cohort);
  for (const auto& e : chart.series) display.push_back(&e);
  for (std::size_t i = 0; i < display.size(); ++i) {
    if (display[i]->entity != chart.focal_entity) continue;
    const std::size_t group_start = display[i]->rank - 1;
    std::rotate(display.begin() + static_cast<std::ptrdiff_t>(group_start),
                display.begin() + static_cast<std::ptrdiff_t>(i),
                display.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    break;
  }

  const double max_count = static_cast<double>(chart.series.front().count);
  auto bar_height = [&](std::uint64_t count) {
    if (options.log_scale) return g.plot_height * std::log1p(count) / std::log1p(max_count);
    return g.plot_height * static_cast<double>(count) / max_count;
  };
  const double bar_width = g.slot >= 3 ? g.slot * 0.8 : std::max(g.slot, 0.5);
  const double base_y = g.top + g.plot_height;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(options.width) +
         "\" height=\"" + num(options.height) + "\" viewBox=\"0 0 " + num(options.width) + " " +
         num(options.height) + "\">\n";
  const std::string label = xml_escape(to_string(chart.combination));
  svg += "<title>" + xml_escape(chart.focal_entity) + " in " + label + "</title>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(options.width) + "\" height=\"" +
         num(options.height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + num(g.left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" +
         label + "</text>\n";
  svg += "<text x=\"" + num(g.left) + "\" y=\"44\" font-family=\"sans-serif\" font-size=\"12\">" +
         xml_escape(chart.focal_entity) + ": rank " + std::to_string(chart.focal_rank) + " of " +
         std::to_string(cohort) + "</text>\n";

  svg += "<g class=\"bars\">\n";
  for (std::size_t slot = 0; slot < display.size(); ++slot) {
    const bool focal = display[slot]->entity == chart.focal_entity;
    if (slot >= options.max_bars && !focal) continue;
    const double h = bar_height(display[slot]->count);
    const double x = g.left + static_cast<double>(slot) * g.slot + (g.slot - bar_width) / 2;
    svg += "<rect class=\"" + std::string(focal ? "bar focal" : "bar") + "\" x=\"" + num(x) +
           "\" y=\"" + num(base_y - h) + "\" width=\"" + num(bar_width) + "\" height=\"" + num(h) +
           "\" fill=\"" + (focal ? "#d62728" : "#4c78a8") + "\"><title>" +
           xml_escape(display[slot]->entity) + ": " + std::to_string(display[slot]->count) +
           "</title></rect>\n";
  }
  svg += "</g>\n";

  if (chart.focal_rank > 0) {
    const double mx = g.x_of_rank(chart.focal_rank);
    svg += "<line class=\"focal-marker\" data-rank=\"" + std::to_string(chart.focal_rank) +
           "\" data-cohort=\"" + std::to_string(cohort) + "\" x1=\"" + num(mx) + "\" y1=\"" +
           num(g.top) + "\" x2=\"" + num(mx) + "\" y2=\"" + num(base_y) +
           "\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
  }

  // Axes.
  svg += "<line x1=\"" + num(g.left) + "\" y1=\"" + num(base_y) + "\" x2=\"" +
         num(g.left + g.plot_width) + "\" y2=\"" + num(base_y) + "\" stroke=\"#000000\"/>\n";
  svg += "<line x1=\"" + num(g.left) + "\" y1=\"" + num(g.top) + "\" x2=\"" + num(g.left) +
         "\" y2=\"" + num(base_y) + "\" stroke=\"#000000\"/>\n";
  svg += "<text x=\"" + num(g.left - 6) + "\" y=\"" + num(g.top + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         std::to_string(chart.series.front().count) + "</text>\n";
  svg += "<text x=\"" + num(g.left - 6) + "\" y=\"" + num(base_y) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
  svg += "<text x=\"" + num(g.left + g.plot_width / 2) + "\" y=\"" +
         num(options.height - 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">entities ranked by "
         "entry count (rank 1 at left, cohort " +
         std::to_string(cohort) + ")</text>\n";
  svg += "<text transform=\"translate(20 " + num(g.top + g.plot_height / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "entry count" +
         std::string(options.log_scale ? " (log)" : "") + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

// File-system safe name for one value or one combination.
inline std::string slugify(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '-';
    out += keep ? c : '-';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  if (out.size() > 100) out.resize(100);
  return out;
}

inline std::string slugify(const Combination& combination) {
  std::string out;
  for (std::size_t j = 0; j < combination.size(); ++j) {
    if (j > 0) out += "__";
    out += slugify(combination[j]);
  }
  return out;
}

// Writes <dir>/<entity>/<combination-slug>.svg for every chart and an
// explanation.json index next to them. Returns the entity directory.
inline std::filesystem::path write_explanation(const ExplanationBundle& bundle,
                                               const std::filesystem::path& dir,
                                               const ChartOptions& options = {}) {
  const auto entity_dir = dir / slugify(bundle.entity);
  std::filesystem::create_directories(entity_dir);
  std::set<std::string> used;
  Json index;
  index["entity"] = bundle.entity;
  index["mrr"] = bundle.mrr ? Json(round_sig6(*bundle.mrr)) : Json(nullptr);
  index["expected_rank"] = bundle.expected_rank ? Json(round_sig6(*bundle.expected_rank)) : Json(nullptr);
  auto emit = [&](const std::vector<ChartData>& charts, const char* kind) {
    Json list = Json::array();
    for (const auto& chart : charts) {
      std::string name = slugify(chart.combination);
      for (int n = 2; !used.insert(name).second; ++n) name = slugify(chart.combination) + "-" + std::to_string(n);
      const std::string file = name + ".svg";
      std::ofstream out(entity_dir / file, std::ios::binary);
      out << render_chart(chart, options);
      if (!out) throw InputError("cannot write " + (entity_dir / file).string());
      list.push_back({{"combination", chart.combination},
                      {"focal_rank", chart.focal_rank},
                      {"cohort_size", chart.series.size()},
                      {"file", file}});
    }
    index[kind] = std::move(list);
  };
  emit(bundle.baseline_charts, "baseline_charts");
  emit(bundle.anomaly_charts, "anomaly_charts");
  std::ofstream out(entity_dir / "explanation.json", std::ios::binary);
  out << index.dump(2) << "\n";
  if (!out) throw InputError("cannot write " + (entity_dir / "explanation.json").string());
  return entity_dir;
}

}  // namespace logrank
