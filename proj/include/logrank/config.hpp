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

// Key-value configuration files.
//
//   # comment
//   key = value
//
// Keys may repeat where a list is expected ("plant"). Unknown keys are
// rejected so that typos surface as errors.

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logrank/common.hpp"
#include "logrank/ingest.hpp"

namespace logrank {

class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, std::string origin = "<config>") {
    KeyValueFile kv;
    kv.origin_ = std::move(origin);
    std::size_t line_no = 0;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      ++line_no;
      // A comment starts at '#' at line start or after whitespace, so a
      // value such as "delimiter = #" survives.
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
          const auto before = detail::trim(line.substr(0, i));
          if (!before.empty() && before.back() == '=') continue;
          line = line.substr(0, i);
          break;
        }
      }
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(kv.origin_ + ":" + std::to_string(line_no) + ": expected key = value");
      }
      const auto key = detail::trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(kv.origin_ + ":" + std::to_string(line_no) + ": empty key");
      kv.entries_.emplace_back(std::string(key), std::string(detail::trim(line.substr(eq + 1))));
    }
    return kv;
  }

  static KeyValueFile load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text, path.string());
  }

  // Last occurrence wins.
  std::optional<std::string> get(std::string_view key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries_) {
      if (k == key) out = v;
    }
    return out;
  }

  std::vector<std::string> get_all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
      if (k == key) out.push_back(v);
    }
    return out;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

  template <typename Pred>
  void require_known(Pred allowed) const {
    for (const auto& [k, v] : entries_) {
      if (!allowed(k)) throw ConfigError(origin_ + ": unknown key '" + k + "'");
    }
  }

 private:
  std::string origin_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  if (detail::trim(s).empty()) return out;
  std::vector<std::string_view> parts;
  detail::split_fields(s, sep, parts);
  for (auto p : parts) out.emplace_back(detail::trim(p));
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  s = detail::trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return value;
}

inline double parse_real(std::string_view s, std::string_view what) {
  const std::string text(detail::trim(s));
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid " + std::string(what) + " '" + text + "'");
}

inline bool parse_bool(std::string_view s, std::string_view what) {
  s = detail::trim(s);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
}

inline char parse_delimiter(std::string_view s) {
  if (s == "tab" || s == "\\t") return '\t';
  if (s == "comma") return ',';
  if (s.size() != 1) throw ConfigError("delimiter must be a single character, 'tab' or 'comma'");
  return s.front();
}

inline std::vector<std::uint32_t> parse_p(std::string_view s) {
  std::vector<std::uint32_t> p;
  for (const auto& v : split_list(s)) p.push_back(parse_number<std::uint32_t>(v, "p"));
  if (p.empty()) throw ConfigError("p is empty");
  return p;
}

}  // namespace logrank
