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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "logrank/logrank.hpp"

namespace logrank {
namespace {

ContingencyIndex single_combination(std::vector<std::pair<std::string, std::uint64_t>> counts) {
  std::vector<ContingencyIndex::Triple> t;
  for (auto& [e, n] : counts) t.push_back({{"x"}, e, n});
  return ContingencyIndex::from_triples({"cat"}, "entity", t);
}

TEST(RankOrderingTest, StrictOrdering) {
  const auto o = rank_ordering(single_combination({{"X", 10}, {"Y", 4}, {"Z", 1}}), {"x"});
  ASSERT_EQ(o.cohort_size(), 3u);
  EXPECT_EQ(o.entries[0], (RankedEntry{"X", 10, 1}));
  EXPECT_EQ(o.entries[1], (RankedEntry{"Y", 4, 2}));
  EXPECT_EQ(o.entries[2], (RankedEntry{"Z", 1, 3}));
}

TEST(RankOrderingTest, CompetitionRankingForTies) {
  const auto o = rank_ordering(single_combination({{"Y", 10}, {"X", 10}, {"Z", 5}}), {"x"});
  EXPECT_EQ(o.entries[0], (RankedEntry{"X", 10, 1}));
  EXPECT_EQ(o.entries[1], (RankedEntry{"Y", 10, 1}));
  EXPECT_EQ(o.entries[2], (RankedEntry{"Z", 5, 3}));
}

TEST(RankOrderingTest, Singleton) {
  const auto o = rank_ordering(single_combination({{"X", 7}}), {"x"});
  EXPECT_EQ(o.entries[0].rank, 1u);
  EXPECT_EQ(reciprocal_rank(o, "X"), 1.0);
}

TEST(RankOrderingTest, UnobservedCombination) {
  EXPECT_THROW(rank_ordering(single_combination({{"X", 7}}), {"y"}), InputError);
}

TEST(ReciprocalRankTest, Values) {
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  for (int i = 0; i < 5; ++i) counts.emplace_back("e" + std::to_string(i), 10 - i);
  const auto o = rank_ordering(single_combination(counts), {"x"});
  EXPECT_EQ(reciprocal_rank(o, "e3"), 0.25);
  EXPECT_EQ(reciprocal_rank(o, "e0"), 1.0);
  EXPECT_EQ(reciprocal_rank(o, "nobody"), std::nullopt);
}

TEST(MeanReciprocalRankTest, PresentOnlyAveraging) {
  const std::vector<std::optional<std::uint32_t>> ranks{2, 2, 10, std::nullopt, 5};
  EXPECT_NEAR(*mean_reciprocal_rank(ranks), 0.325, 1e-12);
  EXPECT_EQ(mean_reciprocal_rank(std::vector<std::optional<std::uint32_t>>{std::nullopt}), std::nullopt);
}

TEST(ComputeMrrTest, MissingRankFixture) {
  testing::MissingRankFixture f;
  const auto index = f.index();
  const auto b = generate_baseline(marginals_of(index), f.spec());
  ASSERT_EQ(b.size(), 5u);
  const auto stats = compute_mrr("c", b, index);
  EXPECT_NEAR(*stats.mrr, 0.325, 1e-12);
  EXPECT_EQ(stats.baseline_rrs.size(), 4u);
}

// Frozen from exact rational arithmetic over the fixture's ranks:
// SK mean(1/38, 1/22, 1/45, 1/37, 1/26), WN mean(1/2, 1, 1, 1/3, 1/17).
constexpr double kMrrSk = 0.031896224527803475;
constexpr double kMrrWn = 0.5784313725490197;

TEST(ComputeMrrTest, CustomerCohortFixture) {
  testing::CustomerCohortFixture f;
  const auto index = f.index();
  const auto b = generate_baseline(marginals_of(index), f.spec());
  const auto sk = compute_mrr("SK", b, index);
  const auto wn = compute_mrr("WN", b, index);
  EXPECT_NEAR(*sk.mrr, kMrrSk, 1e-15);
  EXPECT_NEAR(*wn.mrr, kMrrWn, 1e-15);
  EXPECT_NEAR(*sk.mrr, 0.032, 5e-4);
  EXPECT_NEAR(*wn.mrr, 0.578, 5e-4);
  EXPECT_NEAR(*sk.expected_rank(), 31, 0.5);
  EXPECT_NEAR(*wn.expected_rank(), 2, 0.5);
}

TEST(ComputeMrrTest, AbsentEntity) {
  testing::CustomerCohortFixture f;
  const auto index = f.index();
  const auto b = generate_baseline(marginals_of(index), f.spec());
  EXPECT_EQ(compute_mrr("nobody", b, index).mrr, std::nullopt);
}

TEST(ComputeDistancesTest, CustomerCohortDistances) {
  testing::CustomerCohortFixture f;
  const auto index = f.index();
  const auto b = generate_baseline(marginals_of(index), f.spec());
  const RankTable ranks(index);
  const auto stats = compute_all_mrr(b, ranks);
  const auto table = compute_distances(std::span<const EntityBaselineStats>(stats), ranks, b, 1);
  // |MRR - RR| with the exact MRRs above.
  EXPECT_NEAR(*table.distance("SK", f.nb1), 0.21810377547219653, 1e-15);
  EXPECT_NEAR(*table.distance("SK", f.nb2), 0.008103775472196525, 1e-15);
  EXPECT_NEAR(*table.distance("WN", f.nb1), 0.47843137254901963, 1e-15);
  EXPECT_NEAR(*table.distance("WN", f.nb2), 0.5584313725490196, 1e-15);
  EXPECT_NEAR(*table.distance("SK", f.nb1), 0.218, 5e-4);
  EXPECT_NEAR(*table.distance("SK", f.nb2), 0.008, 5e-4);
  EXPECT_NEAR(*table.distance("WN", f.nb1), 0.478, 5e-4);
  // Baseline combinations never enter the table.
  EXPECT_EQ(table.distance("SK", {"Firefox", "US", "text/html"}), std::nullopt);
}

TEST(ComputeDistancesTest, EqualRrAndMrrGiveZero) {
  EXPECT_EQ(L1Distance{}(0.5, 0.5), 0.0);
}

TEST(ComputeDistancesTest, MinSupportFiltersCombinations) {
  testing::MissingRankFixture f;
  const auto index = f.index();
  const auto b = generate_baseline(marginals_of(index), f.spec());
  const RankTable ranks(index);
  const auto stats = compute_all_mrr(b, ranks);
  const std::span<const EntityBaselineStats> s(stats);
  // "/z" holds 3 + 2 + 1 = 6 entries.
  EXPECT_TRUE(compute_distances(s, ranks, b, 6).distance("c", {"/z"}));
  EXPECT_FALSE(compute_distances(s, ranks, b, 7).distance("c", {"/z"}));
}

TEST(ComputeDistancesTest, EntitiesWithoutMrrAreExcluded) {
  const auto index = ContingencyIndex::from_triples(
      {"cat"}, "entity",
      {{{"a"}, "X", 5}, {{"a"}, "Y", 3}, {{"b"}, "Z", 1}, {{"b"}, "X", 1}});
  const auto b = generate_baseline(marginals_of(index), testing::spec_for({"cat"}, "entity", {1}));
  const RankTable ranks(index);
  const auto stats = compute_all_mrr(b, ranks);
  const auto table = compute_distances(std::span<const EntityBaselineStats>(stats), ranks, b, 1);
  EXPECT_TRUE(table.distance("X", {"b"}));
  EXPECT_FALSE(table.distance("Z", {"b"}));
  EXPECT_EQ(table.size(), 1u);
}

struct SquaredDistance {
  double operator()(double rr, double mrr) const { return (rr - mrr) * (rr - mrr); }
};

TEST(ComputeDistancesTest, DistanceFunctionIsSubstitutable) {
  testing::CustomerCohortFixture f;
  const auto index = f.index();
  const auto b = generate_baseline(marginals_of(index), f.spec());
  const RankTable ranks(index);
  const auto stats = compute_all_mrr(b, ranks);
  const auto table = compute_distances(std::span<const EntityBaselineStats>(stats), ranks, b, 1,
                                       SquaredDistance{});
  EXPECT_NEAR(*table.distance("SK", f.nb1), std::pow(0.25 - kMrrSk, 2), 1e-15);
}

// Random small instance as raw (combination, entity) entries.
struct SmallInstance {
  std::vector<std::pair<std::string, std::string>> entries;  // (combination value, entity)
};

SmallInstance random_instance(std::mt19937_64& rng) {
  SmallInstance out;
  const std::size_t combos = 1 + rng() % 4;
  const std::size_t entities = 1 + rng() % 5;
  const std::size_t n = 1 + rng() % 40;
  for (std::size_t i = 0; i < n; ++i) {
    out.entries.emplace_back("v" + std::to_string(rng() % combos), "e" + std::to_string(rng() % entities));
  }
  return out;
}

// Brute force: select the subset of entries for each combination, count per
// entity, rank by sorting the counts, then apply the definitions directly.
std::map<std::pair<std::string, std::string>, double> brute_force_distances(
    const SmallInstance& inst, std::uint32_t p, std::uint64_t min_support) {
  std::set<std::string> combos;
  std::set<std::string> entities;
  std::map<std::string, std::uint64_t> marginal;
  for (const auto& [c, e] : inst.entries) {
    combos.insert(c);
    entities.insert(e);
    ++marginal[c];
  }
  std::vector<std::pair<std::string, std::uint64_t>> sorted(marginal.begin(), marginal.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::set<std::string> baseline;
  for (std::size_t i = 0; i < sorted.size() && i < p; ++i) baseline.insert(sorted[i].first);

  auto rank_of = [&](const std::string& combo, const std::string& entity) -> std::optional<std::uint32_t> {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [c, e] : inst.entries) {
      if (c == combo) ++counts[e];
    }
    if (!counts.count(entity)) return std::nullopt;
    std::vector<std::uint64_t> values;
    for (const auto& [e, n] : counts) values.push_back(n);
    std::sort(values.rbegin(), values.rend());
    const auto pos = std::find(values.begin(), values.end(), counts[entity]) - values.begin();
    return static_cast<std::uint32_t>(pos + 1);
  };

  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& e : entities) {
    std::vector<std::optional<std::uint32_t>> ranks;
    for (const auto& b : baseline) ranks.push_back(rank_of(b, e));
    const auto mrr = mean_reciprocal_rank(ranks);
    if (!mrr) continue;
    for (const auto& c : combos) {
      if (baseline.count(c)) continue;
      if (marginal[c] < min_support) continue;
      if (const auto r = rank_of(c, e)) out[{e, c}] = std::abs(1.0 / *r - *mrr);
    }
  }
  return out;
}

TEST(RankStatsPropertyTest, AgreesWithBruteForceOnSmallInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = random_instance(rng);
    const std::uint32_t p = 1 + static_cast<std::uint32_t>(rng() % 2);
    const std::uint64_t min_support = 1 + rng() % 3;
    std::vector<ContingencyIndex::Triple> t;
    for (const auto& [c, e] : inst.entries) t.push_back({{c}, e, 1});
    const auto index = ContingencyIndex::from_triples({"cat"}, "entity", t);
    const auto b = generate_baseline(marginals_of(index), testing::spec_for({"cat"}, "entity", {p}));
    const RankTable ranks(index);
    const auto stats = compute_all_mrr(b, ranks);
    const auto table =
        compute_distances(std::span<const EntityBaselineStats>(stats), ranks, b, min_support);

    const auto expected = brute_force_distances(inst, p, min_support);
    ASSERT_EQ(table.size(), expected.size()) << "trial " << trial;
    for (const auto& [key, d] : expected) {
      const auto got = table.distance(key.first, {key.second});
      ASSERT_TRUE(got) << key.first << " " << key.second;
      EXPECT_EQ(*got, d) << "trial " << trial;
    }
  }
}

ContingencyIndex random_index(std::mt19937_64& rng, std::uint64_t scale = 1) {
  std::vector<ContingencyIndex::Triple> t;
  const std::size_t combos = 1 + rng() % 12;
  for (std::size_t c = 0; c < combos; ++c) {
    const std::size_t cohort = 1 + rng() % 10;
    for (std::size_t e = 0; e < cohort; ++e) {
      t.push_back({{"a" + std::to_string(rng() % 4), "b" + std::to_string(c)},
                   "e" + std::to_string(rng() % 15), (1 + rng() % 6) * scale});
    }
  }
  return ContingencyIndex::from_triples({"a", "b"}, "entity", t);
}

ContingencyIndex scaled(const ContingencyIndex& index, std::uint64_t factor) {
  auto t = index.triples();
  for (auto& x : t) x.count *= factor;
  return ContingencyIndex::from_triples(index.categories(), index.entity_field(), t);
}

TEST(RankStatsPropertyTest, BoundsAndMonotoneReciprocalRanks) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto index = random_index(rng);
    for (const auto& c : index.combinations()) {
      const auto o = rank_ordering(index, c);
      double previous = 1.0;
      for (const auto& e : o.entries) {
        const double rr = 1.0 / e.rank;
        EXPECT_GT(rr, 0.0);
        EXPECT_LE(rr, previous);
        previous = rr;
      }
    }
    const auto spec = testing::spec_for({"a", "b"}, "entity", {2});
    const auto b = generate_baseline(marginals_of(index), spec);
    const RankTable ranks(index);
    for (const auto& s : compute_all_mrr(b, ranks)) {
      if (!s.mrr) continue;
      EXPECT_GT(*s.mrr, 0.0);
      EXPECT_LE(*s.mrr, 1.0);
      const bool all_first = std::all_of(s.baseline_rrs.begin(), s.baseline_rrs.end(),
                                         [](const BaselineRR& x) { return x.rank == 1; });
      EXPECT_EQ(*s.mrr == 1.0, all_first);
    }
  }
}

TEST(RankStatsPropertyTest, InvariantUnderUniformScaling) {
  std::mt19937_64 rng(6);
  const auto spec = testing::spec_for({"a", "b"}, "entity", {2});
  for (int trial = 0; trial < 100; ++trial) {
    const auto index = random_index(rng);
    const auto big = scaled(index, 2 + rng() % 50);
    for (const auto& c : index.combinations()) {
      const auto a = rank_ordering(index, c);
      const auto z = rank_ordering(big, c);
      ASSERT_EQ(a.entries.size(), z.entries.size());
      for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_EQ(a.entries[i].entity, z.entries[i].entity);
        EXPECT_EQ(a.entries[i].rank, z.entries[i].rank);
      }
    }
    const auto b1 = generate_baseline(marginals_of(index), spec);
    const auto b2 = generate_baseline(marginals_of(big), spec);
    ASSERT_EQ(b1, b2);
    const auto r1 = recommend_all(index, b1, spec);
    const auto r2 = recommend_all(big, b2, spec);
    ASSERT_EQ(r1.size(), r2.size());
    for (std::size_t e = 0; e < r1.size(); ++e) {
      EXPECT_EQ(r1[e].mrr, r2[e].mrr);
      ASSERT_EQ(r1[e].items.size(), r2[e].items.size());
      for (std::size_t i = 0; i < r1[e].items.size(); ++i) {
        EXPECT_EQ(r1[e].items[i].combination, r2[e].items[i].combination);
        EXPECT_EQ(r1[e].items[i].distance, r2[e].items[i].distance);
        EXPECT_EQ(r1[e].items[i].rank, r2[e].items[i].rank);
      }
    }
  }
}

TEST(RankTableTest, ParallelMatchesSerial) {
  std::mt19937_64 rng(8);
  const auto index = random_index(rng);
  const RankTable serial(index, 1);
  const RankTable parallel(index, 4);
  for (std::size_t i = 0; i < index.size(); ++i) {
    for (std::size_t c = 0; c < index.cells(i).size(); ++c) {
      EXPECT_EQ(serial.rank(i, c), parallel.rank(i, c));
    }
  }
}

}  // namespace
}  // namespace logrank
