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

// Record parsing and the streaming aggregation that builds per-category
// marginal counts and the combination-by-entity contingency index.
//
// Aggregates built from disjoint slices of a log merge exactly: counts are
// integers and the final structures are kept in sorted order, so any
// partition of the input produces the same bytes after merging.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "logrank/common.hpp"

namespace logrank {

struct FieldMapping {
  char delimiter = ',';
  std::vector<std::string> column_names;
  std::string missing_token = "Unknown";

  // Position of `name` in column_names, if mapped.
  std::optional<std::size_t> column_of(std::string_view name) const {
    const auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - column_names.begin());
  }

  void validate() const {
    if (column_names.empty()) throw ConfigError("field mapping has no columns");
    std::unordered_set<std::string_view> seen;
    for (const auto& name : column_names) {
      if (name.empty()) throw ConfigError("field mapping has an empty column name");
      if (!seen.insert(name).second) {
        throw ConfigError("duplicate column name '" + name + "'");
      }
    }
  }
};

struct LogRecord {
  std::vector<std::string> values;
  bool operator==(const LogRecord&) const = default;
};

struct AnalysisSpec {
  std::vector<std::string> categories;
  std::string entity_field = "entity";
  std::vector<std::uint32_t> p;  // one per category
  std::uint32_t k = 5;
  std::uint64_t min_support = 1;

  std::size_t arity() const { return categories.size(); }

  // Expands a single p value to every category.
  void broadcast_p() {
    if (p.empty()) p.assign(categories.size(), 2);
    if (p.size() == 1 && categories.size() > 1) p.assign(categories.size(), p.front());
  }

  void validate() const {
    if (categories.empty()) throw ConfigError("at least one category is required");
    if (entity_field.empty()) throw ConfigError("entity field is not set");
    std::unordered_set<std::string_view> seen;
    for (const auto& c : categories) {
      if (c.empty()) throw ConfigError("empty category name");
      if (!seen.insert(c).second) throw ConfigError("duplicate category '" + c + "'");
      if (c == entity_field) {
        throw ConfigError("entity field '" + c + "' cannot also be a category");
      }
    }
    if (p.size() != categories.size()) {
      throw ConfigError("expected " + std::to_string(categories.size()) +
                        " p values, got " + std::to_string(p.size()));
    }
    for (auto v : p) {
      if (v == 0) throw ConfigError("p values must be positive");
    }
    if (k == 0) throw ConfigError("k must be positive");
  }

  void validate(const FieldMapping& mapping) const {
    validate();
    mapping.validate();
    for (const auto& c : categories) {
      if (!mapping.column_of(c)) throw ConfigError("category '" + c + "' is not a mapped column");
    }
    if (!mapping.column_of(entity_field)) {
      throw ConfigError("entity field '" + entity_field + "' is not a mapped column");
    }
  }
};

struct Rejection {
  std::string reason;
};

using ParseResult = std::variant<LogRecord, Rejection>;

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits on every delimiter, keeping empty and trailing fields.
inline void split_fields(std::string_view line, char delimiter,
                         std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Lines holding nothing but a line terminator are not records.
inline bool is_blank_line(std::string_view line) {
  return line.empty() || line == "\r";
}

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

}  // namespace detail

inline ParseResult parse_record(std::string_view line, const FieldMapping& mapping) {
  std::vector<std::string_view> fields;
  detail::split_fields(line, mapping.delimiter, fields);
  if (fields.size() != mapping.column_names.size()) {
    return Rejection{"column-count mismatch: expected " +
                     std::to_string(mapping.column_names.size()) + ", got " +
                     std::to_string(fields.size())};
  }
  LogRecord record;
  record.values.reserve(fields.size());
  for (auto f : fields) {
    f = detail::trim(f);
    record.values.emplace_back(f.empty() ? std::string_view(mapping.missing_token) : f);
  }
  return record;
}

class CategoryMarginals {
 public:
  using Counts = std::map<std::string, std::uint64_t, std::less<>>;

  CategoryMarginals() = default;
  explicit CategoryMarginals(std::vector<std::string> categories)
      : categories_(std::move(categories)), counts_(categories_.size()) {}

  const std::vector<std::string>& categories() const { return categories_; }
  std::uint64_t total_records() const { return total_records_; }

  const Counts& counts(std::size_t j) const { return counts_.at(j); }

  const Counts& counts(std::string_view category) const {
    for (std::size_t j = 0; j < categories_.size(); ++j) {
      if (categories_[j] == category) return counts_[j];
    }
    throw ConfigError("unknown category '" + std::string(category) + "'");
  }

  // Cardinality n_j of category j.
  std::size_t cardinality(std::size_t j) const { return counts_.at(j).size(); }

  void add(std::size_t j, std::string_view value, std::uint64_t n) {
    auto& m = counts_.at(j);
    auto it = m.find(value);
    if (it == m.end()) {
      m.emplace(std::string(value), n);
    } else {
      it->second += n;
    }
  }

  void add_records(std::uint64_t n) { total_records_ += n; }

  bool operator==(const CategoryMarginals&) const = default;

 private:
  std::vector<std::string> categories_;
  std::vector<Counts> counts_;
  std::uint64_t total_records_ = 0;
};

// Counts of log entries per (combination, entity). Combinations are kept in
// ascending lexicographic order and entities are interned in ascending order,
// so positional ids double as the deterministic tie-break order.
class ContingencyIndex {
 public:
  struct Cell {
    std::uint32_t entity;
    std::uint64_t count;
    bool operator==(const Cell&) const = default;
  };

  struct Triple {
    Combination combination;
    std::string entity;
    std::uint64_t count;
  };

  ContingencyIndex() = default;
  ContingencyIndex(std::vector<std::string> categories, std::string entity_field)
      : categories_(std::move(categories)), entity_field_(std::move(entity_field)) {}

  // Builds an index from unordered (combination, entity, count) triples;
  // duplicates are summed and zero counts dropped.
  static ContingencyIndex from_triples(std::vector<std::string> categories,
                                       std::string entity_field,
                                       std::vector<Triple> triples,
                                       std::uint64_t rejected_records = 0) {
    ContingencyIndex index(std::move(categories), std::move(entity_field));
    index.rejected_records_ = rejected_records;
    index.offsets_.clear();
    for (const auto& t : triples) {
      if (t.combination.size() != index.arity()) {
        throw InvariantError("combination " + to_string(t.combination) +
                             " does not match index arity");
      }
    }
    std::vector<std::string> entities;
    entities.reserve(triples.size());
    for (const auto& t : triples) entities.push_back(t.entity);
    std::sort(entities.begin(), entities.end());
    entities.erase(std::unique(entities.begin(), entities.end()), entities.end());

    std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) {
      return std::tie(a.combination, a.entity) < std::tie(b.combination, b.entity);
    });
    std::vector<bool> used(entities.size(), false);
    for (std::size_t i = 0; i < triples.size();) {
      std::size_t j = i;
      const std::size_t first_cell = index.cells_.size();
      while (j < triples.size() && triples[j].combination == triples[i].combination) {
        std::uint64_t count = 0;
        const std::string& entity = triples[j].entity;
        while (j < triples.size() && triples[j].combination == triples[i].combination &&
               triples[j].entity == entity) {
          count += triples[j].count;
          ++j;
        }
        if (count == 0) continue;
        const auto id = static_cast<std::uint32_t>(
            std::lower_bound(entities.begin(), entities.end(), entity) - entities.begin());
        used[id] = true;
        index.cells_.push_back({id, count});
        index.total_records_ += count;
      }
      if (index.cells_.size() > first_cell) {
        index.combinations_.push_back(std::move(triples[i].combination));
        index.offsets_.push_back(first_cell);
      }
      i = j;
    }
    index.offsets_.push_back(index.cells_.size());
    index.entities_ = std::move(entities);
    if (std::find(used.begin(), used.end(), false) != used.end()) index.compact_entities();
    return index;
  }

  const std::vector<std::string>& categories() const { return categories_; }
  const std::string& entity_field() const { return entity_field_; }
  std::size_t arity() const { return categories_.size(); }

  // Every entity observed in at least one combination, ascending.
  const std::vector<std::string>& entities() const { return entities_; }

  std::optional<std::uint32_t> entity_id(std::string_view entity) const {
    const auto it = std::lower_bound(entities_.begin(), entities_.end(), entity);
    if (it == entities_.end() || *it != entity) return std::nullopt;
    return static_cast<std::uint32_t>(it - entities_.begin());
  }

  std::size_t size() const { return combinations_.size(); }
  bool empty() const { return combinations_.empty(); }

  const Combination& combination(std::size_t i) const { return combinations_.at(i); }
  const std::vector<Combination>& combinations() const { return combinations_; }

  // Cells of combination i, ascending by entity id.
  std::span<const Cell> cells(std::size_t i) const {
    return std::span<const Cell>(cells_).subspan(offsets_.at(i), offsets_.at(i + 1) - offsets_[i]);
  }

  std::uint64_t combination_total(std::size_t i) const {
    std::uint64_t total = 0;
    for (const auto& c : cells(i)) total += c.count;
    return total;
  }

  std::optional<std::size_t> find(const Combination& combination) const {
    const auto it = std::lower_bound(combinations_.begin(), combinations_.end(), combination);
    if (it == combinations_.end() || *it != combination) return std::nullopt;
    return static_cast<std::size_t>(it - combinations_.begin());
  }

  std::uint64_t count(const Combination& combination, std::string_view entity) const {
    const auto i = find(combination);
    const auto e = entity_id(entity);
    if (!i || !e) return 0;
    const auto row = cells(*i);
    const auto it = std::lower_bound(row.begin(), row.end(), *e,
                                     [](const Cell& c, std::uint32_t id) { return c.entity < id; });
    return (it != row.end() && it->entity == *e) ? it->count : 0;
  }

  std::uint64_t total_records() const { return total_records_; }
  std::uint64_t rejected_records() const { return rejected_records_; }
  void add_rejected(std::uint64_t n) { rejected_records_ += n; }

  // Flattens back to triples, ordered by (combination, entity).
  std::vector<Triple> triples() const {
    std::vector<Triple> out;
    out.reserve(cells_.size());
    for (std::size_t i = 0; i < size(); ++i) {
      for (const auto& c : cells(i)) out.push_back({combinations_[i], entities_[c.entity], c.count});
    }
    return out;
  }

  bool operator==(const ContingencyIndex&) const = default;

  friend ContingencyIndex merge(const ContingencyIndex& a, const ContingencyIndex& b);

 private:
  void compact_entities() {
    std::vector<std::uint32_t> remap(entities_.size(), UINT32_MAX);
    for (const auto& c : cells_) remap[c.entity] = 0;
    std::vector<std::string> kept;
    for (std::size_t e = 0; e < entities_.size(); ++e) {
      if (remap[e] == 0) {
        remap[e] = static_cast<std::uint32_t>(kept.size());
        kept.push_back(std::move(entities_[e]));
      }
    }
    for (auto& c : cells_) c.entity = remap[c.entity];
    entities_ = std::move(kept);
  }

  std::vector<std::string> categories_;
  std::string entity_field_;
  std::vector<std::string> entities_;
  std::vector<Combination> combinations_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Cell> cells_;
  std::uint64_t total_records_ = 0;
  std::uint64_t rejected_records_ = 0;
};

inline ContingencyIndex merge(const ContingencyIndex& a, const ContingencyIndex& b) {
  if (a.categories_ != b.categories_ || a.entity_field_ != b.entity_field_) {
    throw ConfigError("cannot merge indexes built under different analysis specs");
  }
  ContingencyIndex out(a.categories_, a.entity_field_);
  std::set_union(a.entities_.begin(), a.entities_.end(), b.entities_.begin(), b.entities_.end(),
                 std::back_inserter(out.entities_));
  auto remap_of = [&out](const std::vector<std::string>& from) {
    std::vector<std::uint32_t> remap(from.size());
    std::size_t pos = 0;
    for (std::size_t e = 0; e < from.size(); ++e) {
      while (out.entities_[pos] != from[e]) ++pos;
      remap[e] = static_cast<std::uint32_t>(pos);
    }
    return remap;
  };
  const auto ra = remap_of(a.entities_);
  const auto rb = remap_of(b.entities_);

  out.cells_.reserve(a.cells_.size() + b.cells_.size());
  out.offsets_.clear();
  auto append_row = [&out](std::span<const ContingencyIndex::Cell> row,
                           const std::vector<std::uint32_t>& remap) {
    for (const auto& c : row) out.cells_.push_back({remap[c.entity], c.count});
  };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    out.offsets_.push_back(out.cells_.size());
    if (j == b.size() || (i < a.size() && a.combinations_[i] < b.combinations_[j])) {
      out.combinations_.push_back(a.combinations_[i]);
      append_row(a.cells(i++), ra);
    } else if (i == a.size() || b.combinations_[j] < a.combinations_[i]) {
      out.combinations_.push_back(b.combinations_[j]);
      append_row(b.cells(j++), rb);
    } else {
      out.combinations_.push_back(a.combinations_[i]);
      const auto ca = a.cells(i++);
      const auto cb = b.cells(j++);
      std::size_t x = 0;
      std::size_t y = 0;
      while (x < ca.size() || y < cb.size()) {
        const std::uint32_t ex = x < ca.size() ? ra[ca[x].entity] : UINT32_MAX;
        const std::uint32_t ey = y < cb.size() ? rb[cb[y].entity] : UINT32_MAX;
        if (ex < ey) {
          out.cells_.push_back({ex, ca[x++].count});
        } else if (ey < ex) {
          out.cells_.push_back({ey, cb[y++].count});
        } else {
          out.cells_.push_back({ex, ca[x++].count + cb[y++].count});
        }
      }
    }
  }
  out.offsets_.push_back(out.cells_.size());
  out.total_records_ = a.total_records_ + b.total_records_;
  out.rejected_records_ = a.rejected_records_ + b.rejected_records_;
  return out;
}

inline CategoryMarginals merge(const CategoryMarginals& a, const CategoryMarginals& b) {
  if (a.categories() != b.categories()) {
    throw ConfigError("cannot merge marginals over different categories");
  }
  CategoryMarginals out = a;
  for (std::size_t j = 0; j < b.categories().size(); ++j) {
    for (const auto& [value, n] : b.counts(j)) out.add(j, value, n);
  }
  out.add_records(b.total_records());
  return out;
}

struct Aggregate {
  CategoryMarginals marginals;
  ContingencyIndex index;
  bool operator==(const Aggregate&) const = default;
};

inline Aggregate merge(const Aggregate& a, const Aggregate& b) {
  return {merge(a.marginals, b.marginals), merge(a.index, b.index)};
}

// Derives per-category marginals from an index; every accepted record is
// counted once per category.
inline CategoryMarginals marginals_of(const ContingencyIndex& index) {
  CategoryMarginals marginals(index.categories());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::uint64_t total = index.combination_total(i);
    const auto& combination = index.combination(i);
    for (std::size_t j = 0; j < combination.size(); ++j) marginals.add(j, combination[j], total);
  }
  marginals.add_records(index.total_records());
  return marginals;
}

enum class LineOutcome { kAccepted, kRejected, kBlank };

// Single-pass accumulator over the lines or records of one chunk of a log.
// One builder per worker; finish() yields a partial Aggregate for merging.
class IndexBuilder {
 public:
  IndexBuilder(const AnalysisSpec& spec, const FieldMapping& mapping)
      : spec_(spec), mapping_(mapping) {
    spec.validate(mapping);
    for (const auto& c : spec.categories) category_columns_.push_back(*mapping.column_of(c));
    entity_column_ = *mapping.column_of(spec.entity_field);
  }

  LineOutcome add_line(std::string_view line) {
    if (detail::is_blank_line(line)) return LineOutcome::kBlank;
    detail::split_fields(line, mapping_.delimiter, fields_);
    if (fields_.size() != mapping_.column_names.size()) {
      ++rejected_;
      return LineOutcome::kRejected;
    }
    key_.clear();
    for (auto col : category_columns_) append_key(value_at(col));
    count_cell(value_at(entity_column_));
    return LineOutcome::kAccepted;
  }

  void add(const LogRecord& record) {
    if (record.values.size() != mapping_.column_names.size()) {
      throw InputError("record arity does not match the field mapping");
    }
    key_.clear();
    for (auto col : category_columns_) append_key(record.values[col]);
    count_cell(record.values[entity_column_]);
  }

  void add_rejected(std::uint64_t n = 1) { rejected_ += n; }

  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t rejected() const { return rejected_; }

  Aggregate finish() const {
    std::vector<const std::string*> combo_keys(combos_.size());
    for (const auto& [key, id] : combos_) combo_keys[id] = &key;
    std::vector<const std::string*> entity_names(entities_.size());
    for (const auto& [name, id] : entities_) entity_names[id] = &name;

    std::vector<Combination> decoded(combo_keys.size());
    for (std::size_t i = 0; i < combo_keys.size(); ++i) decoded[i] = decode_key(*combo_keys[i]);

    std::vector<ContingencyIndex::Triple> triples;
    triples.reserve(cells_.size());
    for (const auto& [packed, n] : cells_) {
      triples.push_back({decoded[packed >> 32], *entity_names[packed & 0xffffffffu], n});
    }
    auto index = ContingencyIndex::from_triples(spec_.categories, spec_.entity_field,
                                                std::move(triples), rejected_);
    auto marginals = marginals_of(index);
    return {std::move(marginals), std::move(index)};
  }

 private:
  std::string_view value_at(std::size_t col) const {
    const auto v = detail::trim(fields_[col]);
    return v.empty() ? std::string_view(mapping_.missing_token) : v;
  }

  // Length-prefixed so that no value content can alias a separator.
  void append_key(std::string_view value) {
    const auto len = static_cast<std::uint32_t>(value.size());
    char buf[sizeof len];
    std::memcpy(buf, &len, sizeof len);
    key_.append(buf, sizeof len);
    key_.append(value);
  }

  Combination decode_key(std::string_view key) const {
    Combination out;
    out.reserve(category_columns_.size());
    while (!key.empty()) {
      std::uint32_t len = 0;
      std::memcpy(&len, key.data(), sizeof len);
      key.remove_prefix(sizeof len);
      out.emplace_back(key.substr(0, len));
      key.remove_prefix(len);
    }
    return out;
  }

  void count_cell(std::string_view entity) {
    auto c = combos_.find(std::string_view(key_));
    if (c == combos_.end()) {
      c = combos_.emplace(key_, static_cast<std::uint32_t>(combos_.size())).first;
    }
    auto e = entities_.find(entity);
    if (e == entities_.end()) {
      e = entities_.emplace(std::string(entity), static_cast<std::uint32_t>(entities_.size())).first;
    }
    ++cells_[(static_cast<std::uint64_t>(c->second) << 32) | e->second];
    ++accepted_;
  }

  AnalysisSpec spec_;
  FieldMapping mapping_;
  std::vector<std::size_t> category_columns_;
  std::size_t entity_column_ = 0;
  std::vector<std::string_view> fields_;
  std::string key_;
  std::unordered_map<std::string, std::uint32_t, detail::StringHash, std::equal_to<>> combos_;
  std::unordered_map<std::string, std::uint32_t, detail::StringHash, std::equal_to<>> entities_;
  std::unordered_map<std::uint64_t, std::uint64_t> cells_;
  std::uint64_t accepted_ = 0;
  std::uint64_t rejected_ = 0;
};

inline Aggregate aggregate(std::span<const LogRecord> records, const AnalysisSpec& spec,
                           const FieldMapping& mapping) {
  IndexBuilder builder(spec, mapping);
  for (const auto& r : records) builder.add(r);
  return builder.finish();
}

// Parses and aggregates raw lines; malformed lines are counted, blank lines
// ignored.
inline Aggregate aggregate_lines(std::span<const std::string> lines, const AnalysisSpec& spec,
                                 const FieldMapping& mapping) {
  IndexBuilder builder(spec, mapping);
  for (const auto& l : lines) builder.add_line(l);
  return builder.finish();
}

}  // namespace logrank
