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

// Seeded synthetic access-log generator with planted rank displacements.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "logrank/common.hpp"

namespace logrank {

struct CategoryVocabulary {
  std::string name;
  std::vector<std::string> values;
  std::vector<double> weights;  // popularity, one per value
};

// Inflates `entity` inside `combination` by `inflation` times the mean
// per-entity background count of that combination.
struct PlantSpec {
  std::string entity;
  Combination combination;
  double inflation = 50.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::vector<CategoryVocabulary> categories;
  std::string entity_field = "entity";
  std::vector<std::string> entities;
  std::vector<double> entity_weights;
  std::uint64_t total_entries = 10000;  // background entries, plants come on top
  std::vector<PlantSpec> plants;
  char delimiter = ',';
  double missing_rate = 0.0;    // chance that a categorical field is left empty
  double malformed_rate = 0.0;  // chance that a line is emitted truncated

  void validate() const {
    if (total_entries < 1) throw ConfigError("total_entries must be at least 1");
    if (categories.empty()) throw ConfigError("generator needs at least one category");
    auto check = [](const std::vector<std::string>& values, const std::vector<double>& weights,
                    const std::string& what) {
      if (values.empty()) throw ConfigError(what + " has no values");
      if (values.size() != weights.size()) {
        throw ConfigError(what + ": " + std::to_string(values.size()) + " values but " +
                          std::to_string(weights.size()) + " weights");
      }
      for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError(what + ": weights must be positive");
      }
    };
    for (const auto& c : categories) check(c.values, c.weights, "category '" + c.name + "'");
    check(entities, entity_weights, "entity vocabulary");
    for (const auto& p : plants) {
      if (p.combination.size() != categories.size()) {
        throw ConfigError("plant for '" + p.entity + "' has the wrong arity");
      }
      if (std::find(entities.begin(), entities.end(), p.entity) == entities.end()) {
        throw ConfigError("plant entity '" + p.entity + "' is not in the entity vocabulary");
      }
      for (std::size_t j = 0; j < categories.size(); ++j) {
        const auto& v = categories[j].values;
        if (std::find(v.begin(), v.end(), p.combination[j]) == v.end()) {
          throw ConfigError("plant value '" + p.combination[j] + "' is not in category '" +
                            categories[j].name + "'");
        }
      }
      if (!(p.inflation > 0.0)) throw ConfigError("plant inflation must be positive");
    }
  }
};

struct PlantRecord {
  std::string entity;
  Combination combination;
  double inflation = 0;
  std::uint64_t background_count = 0;  // entity's entries there before planting
  std::uint64_t added_entries = 0;
  std::uint32_t expected_rank = 0;     // entity's position by popularity weight
  std::uint32_t planted_rank = 0;      // competition rank in the combination after planting
  std::uint32_t cohort_size = 0;
  std::int64_t displacement = 0;       // expected_rank - planted_rank
};

struct PlantManifest {
  std::uint64_t seed = 0;
  std::uint64_t background_entries = 0;
  std::uint64_t total_lines = 0;  // data lines, header excluded
  std::vector<PlantRecord> plants;
};

inline std::vector<double> zipf_weights(std::size_t n, double exponent = 1.0) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
  return w;
}

// Zipf-weighted vocabularies named c1..cm with values "c<j>v<NN>" and
// entities "E<NNN>".
inline GeneratorConfig make_zipf_config(std::uint64_t seed, const std::vector<std::size_t>& cardinalities,
                                        std::size_t entity_count, std::uint64_t total_entries,
                                        double exponent = 1.0) {
  GeneratorConfig config;
  config.seed = seed;
  config.total_entries = total_entries;
  for (std::size_t j = 0; j < cardinalities.size(); ++j) {
    CategoryVocabulary c;
    c.name = "c" + std::to_string(j + 1);
    for (std::size_t v = 0; v < cardinalities[j]; ++v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "c%zuv%02zu", j + 1, v + 1);
      c.values.emplace_back(buf);
    }
    c.weights = zipf_weights(cardinalities[j], exponent);
    config.categories.push_back(std::move(c));
  }
  for (std::size_t e = 0; e < entity_count; ++e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "E%03zu", e + 1);
    config.entities.emplace_back(buf);
  }
  config.entity_weights = zipf_weights(entity_count, exponent);
  return config;
}

namespace detail {

// Inverse-CDF sampler driven by raw 64-bit draws, so output depends only on
// the seed and not on the standard library's distribution implementations.
class WeightedSampler {
 public:
  explicit WeightedSampler(const std::vector<double>& weights) : cdf_(weights.size()) {
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) cdf_[i] = acc += weights[i];
    for (auto& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
  }

  std::size_t operator()(std::mt19937_64& rng) const {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

// Writes a header line and the generated entries to `out`.
inline PlantManifest generate_log(const GeneratorConfig& config, std::ostream& out) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const std::size_t m = config.categories.size();
  const char d = config.delimiter;

  std::vector<detail::WeightedSampler> samplers;
  for (const auto& c : config.categories) samplers.emplace_back(c.weights);
  const detail::WeightedSampler entity_sampler(config.entity_weights);

  // Plant targets as value positions, plus background counts per entity.
  std::vector<std::vector<std::size_t>> plant_values;
  for (const auto& p : config.plants) {
    std::vector<std::size_t> pos(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& v = config.categories[j].values;
      pos[j] = static_cast<std::size_t>(std::find(v.begin(), v.end(), p.combination[j]) - v.begin());
    }
    plant_values.push_back(std::move(pos));
  }
  std::vector<std::vector<std::uint64_t>> plant_counts(
      config.plants.size(), std::vector<std::uint64_t>(config.entities.size(), 0));

  std::string buf;
  buf.reserve(1 << 20);
  auto flush = [&] {
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    buf.clear();
  };

  buf += config.entity_field;
  for (const auto& c : config.categories) {
    buf += d;
    buf += c.name;
  }
  buf += '\n';

  PlantManifest manifest;
  manifest.seed = config.seed;
  manifest.background_entries = config.total_entries;

  std::vector<std::size_t> draw(m);
  std::vector<bool> blank(m);
  for (std::uint64_t n = 0; n < config.total_entries; ++n) {
    const std::size_t entity = entity_sampler(rng);
    for (std::size_t j = 0; j < m; ++j) draw[j] = samplers[j](rng);
    bool any_blank = false;
    if (config.missing_rate > 0) {
      for (std::size_t j = 0; j < m; ++j) {
        blank[j] = detail::unit(rng) < config.missing_rate;
        any_blank = any_blank || blank[j];
      }
    }
    const bool malformed = config.malformed_rate > 0 && detail::unit(rng) < config.malformed_rate;
    if (malformed) {
      buf += config.entities[entity];  // entity only: too few columns
      buf += '\n';
    } else {
      buf += config.entities[entity];
      for (std::size_t j = 0; j < m; ++j) {
        buf += d;
        if (!(any_blank && blank[j])) buf += config.categories[j].values[draw[j]];
      }
      buf += '\n';
      if (!any_blank) {
        for (std::size_t p = 0; p < plant_values.size(); ++p) {
          if (draw == plant_values[p]) ++plant_counts[p][entity];
        }
      }
    }
    ++manifest.total_lines;
    if (buf.size() > (1u << 20) - 4096) flush();
  }

  // Expected rank from popularity weight order.
  std::vector<std::size_t> by_weight(config.entities.size());
  for (std::size_t e = 0; e < by_weight.size(); ++e) by_weight[e] = e;
  std::stable_sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
    return config.entity_weights[a] > config.entity_weights[b];
  });

  for (std::size_t p = 0; p < config.plants.size(); ++p) {
    const auto& plant = config.plants[p];
    const std::size_t entity = static_cast<std::size_t>(
        std::find(config.entities.begin(), config.entities.end(), plant.entity) -
        config.entities.begin());
    auto& counts = plant_counts[p];
    std::uint64_t background_total = 0;
    for (auto c : counts) background_total += c;
    const double mean = static_cast<double>(background_total) / static_cast<double>(counts.size());
    const auto added = static_cast<std::uint64_t>(
        std::max(std::ceil(plant.inflation), std::ceil(plant.inflation * mean)));

    PlantRecord record;
    record.entity = plant.entity;
    record.combination = plant.combination;
    record.inflation = plant.inflation;
    record.background_count = counts[entity];
    record.added_entries = added;
    counts[entity] += added;

    std::uint32_t greater = 0;
    std::uint32_t cohort = 0;
    for (auto c : counts) {
      if (c > 0) ++cohort;
      if (c > counts[entity]) ++greater;
    }
    record.planted_rank = greater + 1;
    record.cohort_size = cohort;
    record.expected_rank = static_cast<std::uint32_t>(
        std::find(by_weight.begin(), by_weight.end(), entity) - by_weight.begin() + 1);
    record.displacement =
        static_cast<std::int64_t>(record.expected_rank) - static_cast<std::int64_t>(record.planted_rank);

    std::string line = plant.entity;
    for (const auto& v : plant.combination) {
      line += d;
      line += v;
    }
    line += '\n';
    for (std::uint64_t n = 0; n < added; ++n) {
      buf += line;
      if (buf.size() > (1u << 20) - 4096) flush();
    }
    manifest.total_lines += added;
    manifest.plants.push_back(std::move(record));
  }
  flush();
  return manifest;
}

inline PlantManifest generate_log(const GeneratorConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  auto manifest = generate_log(config, out);
  out.flush();
  if (!out) throw InputError("write failed for '" + path.string() + "'");
  return manifest;
}

inline nlohmann::ordered_json manifest_to_json(const PlantManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["schema"] = "logrank.manifest/1";
  doc["seed"] = manifest.seed;
  doc["background_entries"] = manifest.background_entries;
  doc["total_lines"] = manifest.total_lines;
  auto plants = nlohmann::ordered_json::array();
  for (const auto& p : manifest.plants) {
    plants.push_back({{"entity", p.entity},
                      {"combination", p.combination},
                      {"inflation", p.inflation},
                      {"background_count", p.background_count},
                      {"added_entries", p.added_entries},
                      {"expected_rank", p.expected_rank},
                      {"planted_rank", p.planted_rank},
                      {"cohort_size", p.cohort_size},
                      {"displacement", p.displacement}});
  }
  doc["plants"] = std::move(plants);
  return doc;
}

}  // namespace logrank
