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

// Shared vocabulary types, error classes and the small parallel-for helper
// used across the library.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace logrank {

// An ordered tuple of categorical values, one per analysed category.
using Combination = std::vector<std::string>;

// Base class for every error the library raises. `exit_code` follows the
// command-line contract: 1 usage/config, 2 input, 3 internal invariant.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 1) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what, 2) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(what, 3) {}
};

// Renders a combination as "(a, b, c)".
inline std::string to_string(const Combination& combination) {
  std::string out = "(";
  for (std::size_t i = 0; i < combination.size(); ++i) {
    if (i > 0) out += ", ";
    out += combination[i];
  }
  out += ')';
  return out;
}

// Resolves a requested thread count; 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(begin, end) over `threads` contiguous slices of [0, n). Slices are
// fixed by (n, threads) so callers writing into disjoint per-index slots get
// schedule-independent results.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    fn(0, n);
    return;
  }
  const std::size_t slices = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(slices);
  auto run = [&](std::size_t s) {
    try {
      fn(n * s / slices, n * (s + 1) / slices);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> workers;
    workers.reserve(slices - 1);
    for (std::size_t s = 1; s < slices; ++s) workers.emplace_back(run, s);
    run(0);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace logrank
