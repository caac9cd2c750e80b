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

// Serialization of baselines and reports.
//
// reports.json (schema "logrank.reports/1"):
//   {
//     "schema": "logrank.reports/1",
//     "analysis": {"categories": [...], "entity_field": "...", "k": 5,
//                  "min_support": 1},                      (optional)
//     "reports": [
//       {"entity": "SK", "mrr": 0.0318961, "expected_rank": 31.3518,
//        "items": [{"combination": ["Firefox", "UK", "text/plain"],
//                   "distance": 0.218104, "rr": 0.25, "rank": 4,
//                   "cohort_size": 60, "count": 957}, ...]},
//       ...
//     ],
//     "no_baseline_presence": ["..."]
//   }
// "mrr" and "expected_rank" are null for entities without baseline presence.
// Reals carry 6 significant digits.
//
// reports.csv: one row per item,
//   entity,mrr,expected_rank,position,<category...>,distance,rr,rank,cohort_size,count

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "logrank/baseline.hpp"
#include "logrank/common.hpp"
#include "logrank/ingest.hpp"
#include "logrank/recommend.hpp"

namespace logrank {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kReportsSchema = "logrank.reports/1";
inline constexpr std::string_view kBaselineSchema = "logrank.baseline/1";

// Rounds to 6 significant digits.
inline double round_sig6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format_sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct ReportContext {
  std::vector<std::string> categories;
  std::string entity_field;
  std::uint32_t k = 0;
  std::uint64_t min_support = 0;
};

enum class ReportFormat { kJson, kCsv };

namespace detail {

inline Json optional_real(const std::optional<double>& v) {
  return v ? Json(round_sig6(*v)) : Json(nullptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline Json reports_to_json(const std::vector<EntityAnomalyReport>& reports,
                            const std::optional<ReportContext>& context = std::nullopt) {
  Json doc;
  doc["schema"] = kReportsSchema;
  if (context) {
    doc["analysis"] = {{"categories", context->categories},
                       {"entity_field", context->entity_field},
                       {"k", context->k},
                       {"min_support", context->min_support}};
  }
  Json list = Json::array();
  for (const auto& r : reports) {
    Json items = Json::array();
    for (const auto& item : r.items) {
      items.push_back({{"combination", item.combination},
                       {"distance", round_sig6(item.distance)},
                       {"rr", round_sig6(item.rr)},
                       {"rank", item.rank},
                       {"cohort_size", item.cohort_size},
                       {"count", item.count}});
    }
    list.push_back({{"entity", r.entity},
                    {"mrr", detail::optional_real(r.mrr)},
                    {"expected_rank", detail::optional_real(r.expected_rank)},
                    {"items", std::move(items)}});
  }
  doc["reports"] = std::move(list);
  doc["no_baseline_presence"] = no_baseline_presence(reports);
  return doc;
}

inline std::string reports_to_csv(const std::vector<EntityAnomalyReport>& reports,
                                  const std::optional<ReportContext>& context = std::nullopt) {
  std::size_t arity = 0;
  for (const auto& r : reports) {
    if (!r.items.empty()) {
      arity = r.items.front().combination.size();
      break;
    }
  }
  if (context) arity = context->categories.size();

  std::string out = "entity,mrr,expected_rank,position";
  for (std::size_t j = 0; j < arity; ++j) {
    out += ',';
    out += context ? detail::csv_field(context->categories[j]) : "combination_" + std::to_string(j + 1);
  }
  out += ",distance,rr,rank,cohort_size,count\n";
  for (const auto& r : reports) {
    for (std::size_t n = 0; n < r.items.size(); ++n) {
      const auto& item = r.items[n];
      out += detail::csv_field(r.entity);
      out += ',' + (r.mrr ? format_sig6(*r.mrr) : std::string());
      out += ',' + (r.expected_rank ? format_sig6(*r.expected_rank) : std::string());
      out += ',' + std::to_string(n + 1);
      for (const auto& v : item.combination) out += ',' + detail::csv_field(v);
      out += ',' + format_sig6(item.distance);
      out += ',' + format_sig6(item.rr);
      out += ',' + std::to_string(item.rank);
      out += ',' + std::to_string(item.cohort_size);
      out += ',' + std::to_string(item.count);
      out += '\n';
    }
  }
  return out;
}

inline std::string emit_report(const std::vector<EntityAnomalyReport>& reports, ReportFormat format,
                               const std::optional<ReportContext>& context = std::nullopt) {
  if (format == ReportFormat::kCsv) return reports_to_csv(reports, context);
  return reports_to_json(reports, context).dump(2) + "\n";
}

inline std::vector<EntityAnomalyReport> parse_reports(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed reports document: ") + e.what());
  }
  if (!doc.contains("schema") || doc["schema"] != kReportsSchema) {
    throw InputError("unsupported reports schema");
  }
  std::vector<EntityAnomalyReport> out;
  for (const auto& r : doc.at("reports")) {
    EntityAnomalyReport report;
    report.entity = r.at("entity").get<std::string>();
    if (!r.at("mrr").is_null()) report.mrr = r["mrr"].get<double>();
    if (!r.at("expected_rank").is_null()) report.expected_rank = r["expected_rank"].get<double>();
    for (const auto& item : r.at("items")) {
      report.items.push_back({item.at("combination").get<Combination>(),
                              item.at("distance").get<double>(), item.at("rr").get<double>(),
                              item.at("rank").get<std::uint32_t>(),
                              item.at("cohort_size").get<std::uint32_t>(),
                              item.at("count").get<std::uint64_t>()});
    }
    out.push_back(std::move(report));
  }
  return out;
}

// Reports with every real rounded the way the serializer rounds it.
inline std::vector<EntityAnomalyReport> rounded(std::vector<EntityAnomalyReport> reports) {
  for (auto& r : reports) {
    if (r.mrr) r.mrr = round_sig6(*r.mrr);
    if (r.expected_rank) r.expected_rank = round_sig6(*r.expected_rank);
    for (auto& item : r.items) {
      item.distance = round_sig6(item.distance);
      item.rr = round_sig6(item.rr);
    }
  }
  return reports;
}

// baseline.json (schema "logrank.baseline/1"): per-category top values with
// their marginal counts and cardinality, and the enumerated combinations.
inline Json baseline_to_json(const BaselineSet& baseline, const CategoryMarginals& marginals,
                             const AnalysisSpec& spec, std::uint64_t rejected_records = 0) {
  Json doc;
  doc["schema"] = kBaselineSchema;
  doc["total_records"] = marginals.total_records();
  doc["rejected_records"] = rejected_records;
  Json categories = Json::array();
  for (std::size_t j = 0; j < baseline.categories.size(); ++j) {
    Json values = Json::array();
    for (const auto& v : baseline.top_values[j]) {
      values.push_back({{"value", v}, {"count", marginals.counts(j).at(v)}});
    }
    categories.push_back({{"category", baseline.categories[j]},
                          {"p", spec.p[j]},
                          {"cardinality", marginals.cardinality(j)},
                          {"top_values", std::move(values)}});
  }
  doc["categories"] = std::move(categories);
  doc["combinations"] = baseline.combinations;
  return doc;
}

}  // namespace logrank
