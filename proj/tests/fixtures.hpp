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

// Hand-built logs with prescribed rank positions, shared by the unit and
// acceptance suites.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "logrank/logrank.hpp"

namespace logrank::testing {

// One combination's cohort: `fixed` entities sit at the given competition
// ranks and anonymous fillers take the remaining positions. Position r
// receives count (cohort + 1 - r), so all counts are distinct.
struct CohortPlan {
  Combination combination;
  std::map<std::string, std::uint32_t> fixed;
  std::uint32_t cohort = 0;
};

inline std::vector<ContingencyIndex::Triple> cohort_triples(const std::vector<CohortPlan>& plans) {
  std::vector<ContingencyIndex::Triple> out;
  for (const auto& plan : plans) {
    std::map<std::uint32_t, std::string> by_rank;
    for (const auto& [entity, rank] : plan.fixed) by_rank[rank] = entity;
    std::uint32_t filler = 0;
    for (std::uint32_t r = 1; r <= plan.cohort; ++r) {
      std::string entity;
      if (auto it = by_rank.find(r); it != by_rank.end()) {
        entity = it->second;
      } else {
        char buf[16];
        std::snprintf(buf, sizeof buf, "C%03u", ++filler);
        entity = buf;
      }
      out.push_back({plan.combination, entity, plan.cohort + 1 - r});
    }
  }
  return out;
}

// Writes a header-bearing log with one line per counted entry. The entity
// column comes first.
inline void write_log(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<ContingencyIndex::Triple>& triples) {
  std::ofstream out(path, std::ios::binary);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& t : triples) {
    for (std::uint64_t n = 0; n < t.count; ++n) {
      out << t.entity;
      for (const auto& v : t.combination) out << ',' << v;
      out << "\n";
    }
  }
}

inline AnalysisSpec spec_for(std::vector<std::string> categories, std::string entity,
                             std::vector<std::uint32_t> p, std::uint32_t k = 5,
                             std::uint64_t min_support = 1) {
  AnalysisSpec spec;
  spec.categories = std::move(categories);
  spec.entity_field = std::move(entity);
  spec.p = std::move(p);
  spec.k = k;
  spec.min_support = min_support;
  spec.broadcast_p();
  return spec;
}

// Three categories with two top values each; SK and WN have the baseline
// ranks (38,22,45,-,-,-,37,26) and (2,1,1,3,17,-,-,-) and the non-baseline
// ranks nb1: SK 4, WN 10 and nb2: SK 25, WN 50. Every cohort has 60 members.
struct CustomerCohortFixture {
  std::vector<std::string> columns{"customer", "browser", "country", "ctype"};
  Combination nb1{"Firefox", "UK", "text/plain"};
  Combination nb2{"Chrome", "US", "text/html"};
  std::vector<CohortPlan> plans;

  CustomerCohortFixture() {
    const std::vector<Combination> baseline{
        {"Firefox", "US", "text/html"},  {"Firefox", "US", "image/jpeg"},
        {"Firefox", "UK", "text/html"},  {"Firefox", "UK", "image/jpeg"},
        {"Safari", "US", "text/html"},   {"Safari", "US", "image/jpeg"},
        {"Safari", "UK", "text/html"},   {"Safari", "UK", "image/jpeg"}};
    const std::vector<std::optional<std::uint32_t>> sk{38, 22, 45, std::nullopt, std::nullopt,
                                                       std::nullopt, 37, 26};
    const std::vector<std::optional<std::uint32_t>> wn{2, 1, 1, 3, 17, std::nullopt,
                                                       std::nullopt, std::nullopt};
    for (std::size_t q = 0; q < baseline.size(); ++q) {
      CohortPlan plan{baseline[q], {}, 60};
      if (sk[q]) plan.fixed["SK"] = *sk[q];
      if (wn[q]) plan.fixed["WN"] = *wn[q];
      plans.push_back(plan);
    }
    plans.push_back({nb1, {{"SK", 4}, {"WN", 10}}, 60});
    plans.push_back({nb2, {{"SK", 25}, {"WN", 50}}, 60});
  }

  AnalysisSpec spec(std::uint32_t k = 5) const {
    return spec_for({"browser", "country", "ctype"}, "customer", {2}, k);
  }

  void write(const std::filesystem::path& path) const { write_log(path, columns, cohort_triples(plans)); }

  ContingencyIndex index() const {
    return ContingencyIndex::from_triples({"browser", "country", "ctype"}, "customer",
                                          cohort_triples(plans));
  }
};

// One category with five baseline values; entity "c" has ranks
// (2, 2, 10, absent, 5) in them and rank 1 in a rarer sixth value.
struct MissingRankFixture {
  std::vector<std::string> columns{"entity", "path"};
  std::vector<CohortPlan> plans{
      {{"/a"}, {{"c", 2}}, 12}, {{"/b"}, {{"c", 2}}, 12}, {{"/c"}, {{"c", 10}}, 12},
      {{"/d"}, {}, 12},         {{"/e"}, {{"c", 5}}, 12}, {{"/z"}, {{"c", 1}}, 3}};

  AnalysisSpec spec() const { return spec_for({"path"}, "entity", {5}); }
  void write(const std::filesystem::path& path) const { write_log(path, columns, cohort_triples(plans)); }
  ContingencyIndex index() const {
    return ContingencyIndex::from_triples({"path"}, "entity", cohort_triples(plans));
  }
};

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("logrank-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace logrank::testing
