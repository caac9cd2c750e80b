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

// File input: plain or gzip-compressed delimited logs, read in large blocks
// and parsed by a fixed set of workers into mergeable partial aggregates.

#pragma once

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "logrank/common.hpp"
#include "logrank/ingest.hpp"

namespace logrank {

// Sequential byte source over a plain or ".gz" file.
class ByteSource {
 public:
  explicit ByteSource(const std::filesystem::path& path) : path_(path) {
    if (!std::filesystem::is_regular_file(path)) {
      throw InputError("cannot read input file '" + path.string() + "'");
    }
    if (path.extension() == ".gz") {
      gz_ = gzopen(path.c_str(), "rb");
      if (gz_ == nullptr) throw InputError("cannot open gzip file '" + path.string() + "'");
      gzbuffer(gz_, 1 << 20);
    } else {
      file_ = std::fopen(path.c_str(), "rb");
      if (file_ == nullptr) throw InputError("cannot open input file '" + path.string() + "'");
    }
  }

  ByteSource(const ByteSource&) = delete;
  ByteSource& operator=(const ByteSource&) = delete;

  ~ByteSource() {
    if (gz_ != nullptr) gzclose(gz_);
    if (file_ != nullptr) std::fclose(file_);
  }

  // Appends up to `n` bytes to `out`; returns the number appended (0 at EOF).
  std::size_t read_into(std::string& out, std::size_t n) {
    const std::size_t old = out.size();
    out.resize(old + n);
    std::size_t got = 0;
    if (gz_ != nullptr) {
      const int r = gzread(gz_, out.data() + old, static_cast<unsigned>(n));
      if (r < 0) throw InputError("corrupt gzip stream in '" + path_.string() + "'");
      got = static_cast<std::size_t>(r);
    } else {
      got = std::fread(out.data() + old, 1, n, file_);
      if (got < n && std::ferror(file_)) {
        throw InputError("read error on '" + path_.string() + "'");
      }
    }
    out.resize(old + got);
    return got;
  }

 private:
  std::filesystem::path path_;
  gzFile gz_ = nullptr;
  std::FILE* file_ = nullptr;
};

// Calls fn(line) for every line of the file, without the trailing '\n'.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  ByteSource source(path);
  std::string buf;
  std::size_t start = 0;
  while (true) {
    buf.erase(0, start);
    start = 0;
    const bool more = source.read_into(buf, 1 << 20) > 0;
    std::size_t nl;
    while ((nl = buf.find('\n', start)) != std::string::npos) {
      fn(std::string_view(buf).substr(start, nl - start));
      start = nl + 1;
    }
    if (!more) break;
  }
  if (start < buf.size()) fn(std::string_view(buf).substr(start));
}

// Reads just the first line (used to resolve header-defined columns).
inline std::string read_first_line(const std::filesystem::path& path) {
  ByteSource source(path);
  std::string buf;
  while (buf.find('\n') == std::string::npos) {
    if (source.read_into(buf, 1 << 16) == 0) break;
  }
  return buf.substr(0, buf.find('\n'));
}

// Column names from a header line.
inline std::vector<std::string> parse_header(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  detail::split_fields(line, delimiter, fields);
  std::vector<std::string> names;
  names.reserve(fields.size());
  for (auto f : fields) names.emplace_back(detail::trim(f));
  return names;
}

struct InputOptions {
  FieldMapping mapping;      // column_names may be empty when has_header is set
  bool has_header = true;    // first line of every file is a header
  unsigned threads = 1;      // 0 = hardware concurrency
  std::size_t block_bytes = 16u << 20;
};

// Fills in header-defined columns for `options.mapping` from the first file.
inline FieldMapping resolve_mapping(const std::vector<std::filesystem::path>& paths,
                                    const InputOptions& options) {
  FieldMapping mapping = options.mapping;
  if (mapping.column_names.empty()) {
    if (!options.has_header) throw ConfigError("no columns configured and header mode is off");
    if (paths.empty()) throw ConfigError("no input files");
    mapping.column_names = parse_header(read_first_line(paths.front()), mapping.delimiter);
  }
  mapping.validate();
  return mapping;
}

// Streams every file once. Each block is cut at newline boundaries into one
// slice per worker; every worker owns its IndexBuilder for the whole run and
// the partials are folded left-to-right at the end.
inline Aggregate ingest_files(const std::vector<std::filesystem::path>& paths,
                              const AnalysisSpec& spec, const InputOptions& options) {
  if (paths.empty()) throw ConfigError("no input files");
  for (const auto& p : paths) {
    if (!std::filesystem::is_regular_file(p)) {
      throw InputError("cannot read input file '" + p.string() + "'");
    }
  }
  const FieldMapping mapping = resolve_mapping(paths, options);
  spec.validate(mapping);
  const unsigned threads = resolve_threads(options.threads);

  std::vector<IndexBuilder> builders;
  builders.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) builders.emplace_back(spec, mapping);

  auto process = [&](std::string_view text) {
    std::vector<std::size_t> cuts{0};
    for (unsigned t = 1; t < threads; ++t) {
      std::size_t pos = text.size() * t / threads;
      pos = std::max(pos, cuts.back());
      const std::size_t nl = text.find('\n', pos);
      cuts.push_back(nl == std::string_view::npos ? text.size() : nl + 1);
    }
    cuts.push_back(text.size());
    parallel_for(threads, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        std::string_view slice = text.substr(cuts[t], cuts[t + 1] - cuts[t]);
        while (!slice.empty()) {
          const std::size_t nl = slice.find('\n');
          builders[t].add_line(slice.substr(0, nl));
          if (nl == std::string_view::npos) break;
          slice.remove_prefix(nl + 1);
        }
      }
    });
  };

  for (const auto& path : paths) {
    ByteSource source(path);
    std::string buf;
    bool header_pending = options.has_header;
    bool eof = false;
    while (!eof) {
      eof = source.read_into(buf, options.block_bytes) == 0;
      std::size_t usable = eof ? buf.size() : buf.rfind('\n');
      if (usable == std::string::npos) continue;  // no full line yet
      if (!eof) ++usable;
      std::string_view text(buf.data(), usable);
      if (header_pending) {
        const std::size_t nl = text.find('\n');
        if (nl == std::string_view::npos && !eof) continue;
        header_pending = false;
        const auto header = text.substr(0, nl);
        if (options.mapping.column_names.empty() &&
            parse_header(header, mapping.delimiter) != mapping.column_names) {
          throw InputError("header of '" + path.string() + "' does not match the first input");
        }
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      }
      process(text);
      buf.erase(0, usable);
    }
  }

  std::vector<Aggregate> partials(threads);
  parallel_for(threads, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) partials[t] = builders[t].finish();
  });
  Aggregate total = std::move(partials.front());
  for (unsigned t = 1; t < threads; ++t) total = merge(total, partials[t]);
  return total;
}

}  // namespace logrank
