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

// Per-entity recommendation of the K most abnormal non-baseline
// combinations, ordered by distance from the entity's baseline MRR.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logrank/baseline.hpp"
#include "logrank/common.hpp"
#include "logrank/ingest.hpp"
#include "logrank/rankstats.hpp"

namespace logrank {

struct AnomalyItem {
  Combination combination;
  double distance = 0.0;
  double rr = 0.0;
  std::uint32_t rank = 0;
  std::uint32_t cohort_size = 0;
  std::uint64_t count = 0;  // the entity's entries in this combination
  bool operator==(const AnomalyItem&) const = default;
};

struct EntityAnomalyReport {
  std::string entity;
  std::optional<double> mrr;
  std::optional<double> expected_rank;
  std::vector<AnomalyItem> items;  // distance descending, then combination ascending
  bool operator==(const EntityAnomalyReport&) const = default;
};

inline EntityAnomalyReport top_k(std::string_view entity, const DistanceTable& table,
                                 std::uint32_t k) {
  if (k == 0) throw ConfigError("k must be positive");
  EntityAnomalyReport report{std::string(entity), std::nullopt, std::nullopt, {}};
  const auto& index = table.index();
  const auto id = index.entity_id(entity);
  if (!id) return report;
  report.mrr = table.mrr(*id);
  if (report.mrr) report.expected_rank = 1.0 / *report.mrr;

  std::vector<DistanceTable::Entry> entries(table.entries_for(*id).begin(),
                                            table.entries_for(*id).end());
  const std::size_t take = std::min<std::size_t>(k, entries.size());
  // Index positions are in ascending combination order, so comparing them is
  // the lexicographic tie-break.
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(take),
                    entries.end(), [](const auto& a, const auto& b) {
                      if (a.distance != b.distance) return a.distance > b.distance;
                      return a.combination < b.combination;
                    });
  report.items.reserve(take);
  for (std::size_t n = 0; n < take; ++n) {
    const auto& e = entries[n];
    report.items.push_back(
        {index.combination(e.combination), e.distance, e.rr, e.rank, e.cohort_size, e.count});
  }
  return report;
}

// Intermediate products of one analysis, kept for explanation output.
struct Analysis {
  BaselineSet baseline;
  std::vector<EntityBaselineStats> stats;  // by entity id
  std::vector<EntityAnomalyReport> reports;  // by entity id (ascending entity)
};

inline Analysis analyze(const ContingencyIndex& index, const BaselineSet& baseline,
                        const AnalysisSpec& spec, unsigned threads = 1) {
  if (index.empty()) throw InputError("the log contains no accepted records");
  threads = resolve_threads(threads);
  const RankTable ranks(index, threads);
  Analysis out{baseline, compute_all_mrr(baseline, ranks, threads), {}};
  const DistanceTable table = compute_distances(std::span<const EntityBaselineStats>(out.stats),
                                                ranks, baseline, spec.min_support);
  out.reports.resize(index.entities().size());
  parallel_for(out.reports.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) out.reports[e] = top_k(index.entities()[e], table, spec.k);
  });
  return out;
}

// One report per entity observed anywhere in the index, ordered by entity.
inline std::vector<EntityAnomalyReport> recommend_all(const ContingencyIndex& index,
                                                      const BaselineSet& baseline,
                                                      const AnalysisSpec& spec,
                                                      unsigned threads = 1) {
  return analyze(index, baseline, spec, threads).reports;
}

// Entities that appear in no baseline combination and therefore have no MRR.
inline std::vector<std::string> no_baseline_presence(const std::vector<EntityAnomalyReport>& reports) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    if (!r.mrr) out.push_back(r.entity);
  }
  return out;
}

}  // namespace logrank
