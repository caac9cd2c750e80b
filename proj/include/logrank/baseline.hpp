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

// Baseline discovery: the most frequent values of each category and the
// Cartesian product of those values.

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logrank/common.hpp"
#include "logrank/ingest.hpp"

namespace logrank {

enum class CombinationClass { kBaseline, kNonBaseline };

struct BaselineSet {
  std::vector<std::string> categories;
  // Per category, the chosen values in rank order (count descending).
  std::vector<std::vector<std::string>> top_values;
  // Cartesian product of top_values, last category varying fastest.
  std::vector<Combination> combinations;

  bool contains(const Combination& combination) const {
    return sorted_.count(combination) > 0;
  }

  std::size_t size() const { return combinations.size(); }

  // Rebuilds the membership set after combinations are assigned by hand.
  void reindex() { sorted_ = {combinations.begin(), combinations.end()}; }

  bool operator==(const BaselineSet& o) const {
    return categories == o.categories && top_values == o.top_values &&
           combinations == o.combinations;
  }

 private:
  std::set<Combination> sorted_;
};

// The `p` most frequent values of one category: count descending, ties by
// value ascending. Returns all values when p exceeds the cardinality.
inline std::vector<std::string> top_p_values(const CategoryMarginals& marginals,
                                             std::string_view category, std::uint32_t p) {
  const auto& counts = marginals.counts(category);
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  const std::size_t take = std::min<std::size_t>(p, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(std::move(ranked[i].first));
  return out;
}

inline BaselineSet generate_baseline(const CategoryMarginals& marginals, const AnalysisSpec& spec) {
  spec.validate();
  BaselineSet baseline;
  baseline.categories = spec.categories;
  for (std::size_t j = 0; j < spec.categories.size(); ++j) {
    auto values = top_p_values(marginals, spec.categories[j], spec.p[j]);
    if (values.empty()) {
      throw InputError("category '" + spec.categories[j] + "' has no observed values");
    }
    baseline.top_values.push_back(std::move(values));
  }

  // Odometer over the per-category lists.
  std::vector<std::size_t> digit(spec.categories.size(), 0);
  while (true) {
    Combination c;
    c.reserve(digit.size());
    for (std::size_t j = 0; j < digit.size(); ++j) c.push_back(baseline.top_values[j][digit[j]]);
    baseline.combinations.push_back(std::move(c));
    std::size_t j = digit.size();
    while (j > 0) {
      --j;
      if (++digit[j] < baseline.top_values[j].size()) break;
      digit[j] = 0;
      if (j == 0) {
        baseline.reindex();
        return baseline;
      }
    }
  }
}

inline CombinationClass classify(const Combination& combination, const BaselineSet& baseline) {
  if (combination.size() != baseline.categories.size()) {
    throw ConfigError("combination " + to_string(combination) + " has arity " +
                      std::to_string(combination.size()) + ", expected " +
                      std::to_string(baseline.categories.size()));
  }
  return baseline.contains(combination) ? CombinationClass::kBaseline
                                        : CombinationClass::kNonBaseline;
}

}  // namespace logrank
