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

// Reference implementation of the whole analysis for small logs. It reads
// the file line by line into ordered maps, ranks entities by counting
// strictly larger competitors and sorts every candidate list in full. It
// shares no code with the streaming pipeline beyond the result types, so the
// two can be checked against each other.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "logrank/common.hpp"
#include "logrank/ingest.hpp"
#include "logrank/recommend.hpp"

namespace logrank {

inline constexpr std::uint64_t kOracleMaxEntries = 1'000'000;

inline std::vector<EntityAnomalyReport> oracle_recommend(const std::filesystem::path& log,
                                                         const AnalysisSpec& spec,
                                                         const FieldMapping& mapping_in,
                                                         bool has_header = true) {
  std::ifstream in(log, std::ios::binary);
  if (!in) throw InputError("oracle cannot read '" + log.string() + "'");

  auto strip = [](std::string s) {
    const std::string ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  auto split = [](const std::string& line, char d) {
    std::vector<std::string> parts(1);
    for (char c : line) {
      if (c == d) {
        parts.emplace_back();
      } else {
        parts.back() += c;
      }
    }
    return parts;
  };

  FieldMapping mapping = mapping_in;
  std::string line;
  bool first = true;
  std::vector<std::vector<std::string>> records;
  while (std::getline(in, line)) {
    if (first && has_header) {
      first = false;
      if (mapping.column_names.empty()) {
        for (auto& name : split(line, mapping.delimiter)) mapping.column_names.push_back(strip(name));
      }
      continue;
    }
    first = false;
    if (line.empty() || line == "\r") continue;
    auto fields = split(line, mapping.delimiter);
    if (fields.size() != mapping.column_names.size()) continue;
    for (auto& f : fields) {
      f = strip(f);
      if (f.empty()) f = mapping.missing_token;
    }
    records.push_back(std::move(fields));
    if (records.size() > kOracleMaxEntries) throw ConfigError("log too large for the oracle");
  }
  spec.validate(mapping);

  auto column = [&mapping](const std::string& name) {
    for (std::size_t i = 0; i < mapping.column_names.size(); ++i) {
      if (mapping.column_names[i] == name) return i;
    }
    throw ConfigError("unmapped column " + name);
  };
  std::vector<std::size_t> cols;
  for (const auto& c : spec.categories) cols.push_back(column(c));
  const std::size_t entity_col = column(spec.entity_field);

  // combination -> entity -> count
  std::map<Combination, std::map<std::string, std::uint64_t>> table;
  std::set<std::string> all_entities;
  std::vector<std::map<std::string, std::uint64_t>> marginal(cols.size());
  for (const auto& r : records) {
    Combination c;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      c.push_back(r[cols[j]]);
      marginal[j][r[cols[j]]] += 1;
    }
    table[c][r[entity_col]] += 1;
    all_entities.insert(r[entity_col]);
  }

  // Baseline: full sort of each category, keep the first p, take every
  // combination of the kept values.
  std::vector<std::vector<std::string>> top(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::vector<std::pair<std::string, std::uint64_t>> v(marginal[j].begin(), marginal[j].end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t i = 0; i < v.size() && i < spec.p[j]; ++i) top[j].push_back(v[i].first);
  }
  std::set<Combination> baseline{Combination{}};
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::set<Combination> next;
    for (const auto& prefix : baseline) {
      for (const auto& v : top[j]) {
        auto c = prefix;
        c.push_back(v);
        next.insert(std::move(c));
      }
    }
    baseline = std::move(next);
  }

  auto rank_in = [](const std::map<std::string, std::uint64_t>& cohort, const std::string& entity) {
    const std::uint64_t mine = cohort.at(entity);
    std::uint32_t greater = 0;
    for (const auto& [other, n] : cohort) {
      if (n > mine) ++greater;
    }
    return greater + 1;
  };

  std::map<std::string, std::optional<double>> mrr;
  for (const auto& entity : all_entities) {
    std::vector<std::uint32_t> ranks;
    for (const auto& b : baseline) {
      const auto it = table.find(b);
      if (it != table.end() && it->second.count(entity)) ranks.push_back(rank_in(it->second, entity));
    }
    if (ranks.empty()) {
      mrr[entity] = std::nullopt;
      continue;
    }
    std::sort(ranks.begin(), ranks.end());
    double sum = 0;
    for (auto r : ranks) sum += 1.0 / r;
    mrr[entity] = sum / static_cast<double>(ranks.size());
  }

  std::map<std::string, std::vector<AnomalyItem>> candidates;
  for (const auto& [combination, cohort] : table) {
    if (baseline.count(combination)) continue;
    std::uint64_t total = 0;
    for (const auto& [e, n] : cohort) total += n;
    if (total < spec.min_support) continue;
    for (const auto& [entity, n] : cohort) {
      if (!mrr[entity]) continue;
      const std::uint32_t rank = rank_in(cohort, entity);
      const double rr = 1.0 / rank;
      const double d = rr > *mrr[entity] ? rr - *mrr[entity] : *mrr[entity] - rr;
      candidates[entity].push_back(
          {combination, d, rr, rank, static_cast<std::uint32_t>(cohort.size()), n});
    }
  }

  std::vector<EntityAnomalyReport> reports;
  for (const auto& entity : all_entities) {
    EntityAnomalyReport report{entity, mrr[entity], std::nullopt, {}};
    if (report.mrr) report.expected_rank = 1.0 / *report.mrr;
    auto items = candidates[entity];
    std::sort(items.begin(), items.end(), [](const AnomalyItem& a, const AnomalyItem& b) {
      if (a.distance != b.distance) return a.distance > b.distance;
      return a.combination < b.combination;
    });
    if (items.size() > spec.k) items.resize(spec.k);
    report.items = std::move(items);
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace logrank
