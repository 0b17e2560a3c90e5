// Copyright 2026 the dsslic authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DSSLIC_COMMON_HPP_
#define DSSLIC_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace dsslic {

// Error taxonomy. The CLI maps these onto exit codes: usage errors -> 1,
// data/dimension/format errors -> 2, external backend failures -> 3.
class Error : public std::runtime_error {
 public:
  enum class Kind { kUsage, kData, kBackend };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(Kind::kUsage, msg) {}
};

// Bad inputs: shape mismatches, out-of-range labels, corrupt containers,
// missing dataset entries, incompatible weights.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(Kind::kData, msg) {}
};

// An external codec or model invocation failed.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& msg) : Error(Kind::kBackend, msg) {}
};

using Rng = std::mt19937;

// Derives a per-stream generator so epoch shuffles and weight init do not
// share a stream; resuming at an epoch boundary then reproduces the original
// run without serializing RNG state.
inline Rng make_rng(uint64_t seed, uint64_t stream) {
  return Rng(static_cast<uint32_t>(seed * 0x9E3779B97F4A7C15ull + stream * 0xBF58476D1CE4E5B9ull + 1ull));
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Next multiple of m at or above n.
inline int round_up(int n, int m) { return ceil_div(n, m) * m; }

}  // namespace dsslic

#endif  // DSSLIC_COMMON_HPP_
