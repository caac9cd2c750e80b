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

// Rank statistics: competition-ranked orderings of entities within each
// combination, reciprocal ranks, baseline mean reciprocal rank (MRR) per
// entity, and the distance of every non-baseline reciprocal rank from it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logrank/baseline.hpp"
#include "logrank/common.hpp"
#include "logrank/ingest.hpp"

namespace logrank {

struct RankedEntry {
  std::string entity;
  std::uint64_t count;
  std::uint32_t rank;
  bool operator==(const RankedEntry&) const = default;
};

struct RankOrdering {
  Combination combination;
  // Count descending; equal counts listed by entity ascending.
  std::vector<RankedEntry> entries;

  std::size_t cohort_size() const { return entries.size(); }
  bool operator==(const RankOrdering&) const = default;
};

// Competition ranks for one row of cells, parallel to the row:
// rank = 1 + number of cells with a strictly greater count.
inline std::vector<std::uint32_t> competition_ranks(std::span<const ContingencyIndex::Cell> row) {
  std::vector<std::uint32_t> order(row.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&row](std::uint32_t a, std::uint32_t b) { return row[a].count > row[b].count; });
  std::vector<std::uint32_t> ranks(row.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const bool tied = pos > 0 && row[order[pos]].count == row[order[pos - 1]].count;
    ranks[order[pos]] = tied ? ranks[order[pos - 1]] : static_cast<std::uint32_t>(pos + 1);
  }
  return ranks;
}

inline RankOrdering rank_ordering(const ContingencyIndex& index, const Combination& combination) {
  const auto i = index.find(combination);
  if (!i) throw InputError("combination " + to_string(combination) + " is not observed");
  const auto row = index.cells(*i);
  const auto ranks = competition_ranks(row);
  RankOrdering ordering{combination, {}};
  ordering.entries.reserve(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    ordering.entries.push_back({index.entities()[row[c].entity], row[c].count, ranks[c]});
  }
  // Cells are entity-ascending already, so a stable sort on count keeps the
  // entity tie order.
  std::stable_sort(ordering.entries.begin(), ordering.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.count > b.count; });
  return ordering;
}

inline std::optional<double> reciprocal_rank(const RankOrdering& ordering, std::string_view entity) {
  for (const auto& e : ordering.entries) {
    if (e.entity == entity) return 1.0 / e.rank;
  }
  return std::nullopt;
}

// Mean of 1/rank over the present ranks only. Terms are summed in ascending
// rank order, which makes the floating-point result independent of the order
// in which the baseline combinations were visited.
inline std::optional<double> mean_reciprocal_rank(std::vector<std::uint32_t> ranks) {
  if (ranks.empty()) return std::nullopt;
  std::sort(ranks.begin(), ranks.end());
  double sum = 0.0;
  for (auto r : ranks) sum += 1.0 / r;
  return sum / static_cast<double>(ranks.size());
}

inline std::optional<double> mean_reciprocal_rank(std::span<const std::optional<std::uint32_t>> ranks) {
  std::vector<std::uint32_t> present;
  for (const auto& r : ranks) {
    if (r) present.push_back(*r);
  }
  return mean_reciprocal_rank(std::move(present));
}

struct BaselineRR {
  std::size_t baseline_position;  // into BaselineSet::combinations
  std::uint32_t rank;
  double rr;
  bool operator==(const BaselineRR&) const = default;
};

struct EntityBaselineStats {
  std::string entity;
  std::vector<BaselineRR> baseline_rrs;  // baseline order, present combinations only
  std::optional<double> mrr;

  std::optional<double> expected_rank() const {
    if (!mrr) return std::nullopt;
    return 1.0 / *mrr;
  }
  bool operator==(const EntityBaselineStats&) const = default;
};

// Competition ranks of every cell of an index, computed once.
class RankTable {
 public:
  RankTable(const ContingencyIndex& index, unsigned threads = 1) : index_(&index) {
    ranks_.resize(index.size());
    parallel_for(index.size(), resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) ranks_[i] = competition_ranks(index.cells(i));
    });
  }

  const ContingencyIndex& index() const { return *index_; }

  // Rank of cell `c` (position within index.cells(i)).
  std::uint32_t rank(std::size_t i, std::size_t c) const { return ranks_[i][c]; }

  std::optional<std::uint32_t> rank_of(std::size_t i, std::uint32_t entity) const {
    const auto row = index_->cells(i);
    const auto it = std::lower_bound(row.begin(), row.end(), entity,
                                     [](const ContingencyIndex::Cell& c, std::uint32_t id) {
                                       return c.entity < id;
                                     });
    if (it == row.end() || it->entity != entity) return std::nullopt;
    return ranks_[i][static_cast<std::size_t>(it - row.begin())];
  }

 private:
  const ContingencyIndex* index_;
  std::vector<std::vector<std::uint32_t>> ranks_;
};

namespace detail {

// Index positions of the baseline combinations that were observed.
inline std::vector<std::pair<std::size_t, std::size_t>> observed_baseline(
    const BaselineSet& baseline, const ContingencyIndex& index) {
  std::vector<std::pair<std::size_t, std::size_t>> out;  // (baseline position, index position)
  for (std::size_t q = 0; q < baseline.combinations.size(); ++q) {
    if (const auto i = index.find(baseline.combinations[q])) out.emplace_back(q, *i);
  }
  return out;
}

inline EntityBaselineStats baseline_stats_for(
    std::uint32_t entity, const RankTable& ranks,
    const std::vector<std::pair<std::size_t, std::size_t>>& observed) {
  EntityBaselineStats stats{ranks.index().entities()[entity], {}, std::nullopt};
  std::vector<std::uint32_t> present;
  for (const auto& [q, i] : observed) {
    if (const auto r = ranks.rank_of(i, entity)) {
      stats.baseline_rrs.push_back({q, *r, 1.0 / *r});
      present.push_back(*r);
    }
  }
  stats.mrr = mean_reciprocal_rank(std::move(present));
  return stats;
}

}  // namespace detail

inline EntityBaselineStats compute_mrr(std::string_view entity, const BaselineSet& baseline,
                                       const ContingencyIndex& index) {
  const auto id = index.entity_id(entity);
  if (!id) return {std::string(entity), {}, std::nullopt};
  EntityBaselineStats stats{std::string(entity), {}, std::nullopt};
  std::vector<std::uint32_t> present;
  for (const auto& [q, i] : detail::observed_baseline(baseline, index)) {
    const auto row = index.cells(i);
    const auto ranks = competition_ranks(row);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c].entity == *id) {
        stats.baseline_rrs.push_back({q, ranks[c], 1.0 / ranks[c]});
        present.push_back(ranks[c]);
      }
    }
  }
  stats.mrr = mean_reciprocal_rank(std::move(present));
  return stats;
}

// Baseline statistics for every entity of the index, by entity id.
inline std::vector<EntityBaselineStats> compute_all_mrr(const BaselineSet& baseline,
                                                        const RankTable& ranks,
                                                        unsigned threads = 1) {
  const auto& index = ranks.index();
  const auto observed = detail::observed_baseline(baseline, index);
  std::vector<EntityBaselineStats> out(index.entities().size());
  parallel_for(out.size(), resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      out[e] = detail::baseline_stats_for(static_cast<std::uint32_t>(e), ranks, observed);
    }
  });
  return out;
}

// The shipped abnormality score: L-1 distance between a reciprocal rank and
// the entity's baseline MRR. compute_distances takes any callable with this
// signature.
struct L1Distance {
  double operator()(double rr, double mrr) const { return std::abs(rr - mrr); }
};

class DistanceTable {
 public:
  struct Entry {
    std::size_t combination;  // position in the index
    double distance;
    double rr;
    std::uint32_t rank;
    std::uint32_t cohort_size;
    std::uint64_t count;
    bool operator==(const Entry&) const = default;
  };

  DistanceTable() = default;
  explicit DistanceTable(const ContingencyIndex& index)
      : index_(&index), entries_(index.entities().size()), mrr_(index.entities().size()) {}

  const ContingencyIndex& index() const { return *index_; }

  std::optional<double> mrr(std::uint32_t entity) const { return mrr_.at(entity); }
  void set_mrr(std::uint32_t entity, std::optional<double> mrr) { mrr_.at(entity) = mrr; }

  // Entries of one entity in ascending combination order.
  std::span<const Entry> entries_for(std::uint32_t entity) const { return entries_.at(entity); }

  std::optional<double> distance(std::string_view entity, const Combination& combination) const {
    const auto e = index_->entity_id(entity);
    const auto i = index_->find(combination);
    if (!e || !i) return std::nullopt;
    for (const auto& entry : entries_[*e]) {
      if (entry.combination == *i) return entry.distance;
    }
    return std::nullopt;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& v : entries_) n += v.size();
    return n;
  }

  void add(std::uint32_t entity, const Entry& entry) { entries_.at(entity).push_back(entry); }

 private:
  const ContingencyIndex* index_ = nullptr;
  std::vector<std::vector<Entry>> entries_;
  std::vector<std::optional<double>> mrr_;
};

// Distances for every observed non-baseline combination whose total count is
// at least `min_support`, for every entity in its cohort that has an MRR.
// `stats` is indexed by entity id, as returned by compute_all_mrr.
template <typename Distance = L1Distance>
DistanceTable compute_distances(std::span<const EntityBaselineStats> stats, const RankTable& ranks,
                                const BaselineSet& baseline, std::uint64_t min_support,
                                Distance distance = {}) {
  const auto& index = ranks.index();
  if (stats.size() != index.entities().size()) {
    throw InvariantError("baseline statistics do not cover every entity of the index");
  }
  DistanceTable table(index);
  for (std::size_t e = 0; e < stats.size(); ++e) {
    table.set_mrr(static_cast<std::uint32_t>(e), stats[e].mrr);
  }
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (baseline.contains(index.combination(i))) continue;
    const auto row = index.cells(i);
    if (index.combination_total(i) < min_support) continue;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto& s = stats[row[c].entity];
      if (!s.mrr) continue;
      const std::uint32_t rank = ranks.rank(i, c);
      const double rr = 1.0 / rank;
      table.add(row[c].entity, {i, distance(rr, *s.mrr), rr, rank,
                                static_cast<std::uint32_t>(row.size()), row[c].count});
    }
  }
  return table;
}

template <typename Distance = L1Distance>
DistanceTable compute_distances(std::span<const EntityBaselineStats> stats,
                                const ContingencyIndex& index, const BaselineSet& baseline,
                                std::uint64_t min_support, Distance distance = {}) {
  // The table keeps a pointer to the index, not to the temporary rank table.
  const RankTable ranks(index);
  return compute_distances(stats, ranks, baseline, min_support, distance);
}

}  // namespace logrank
