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

#ifndef DSSLIC_WEIGHTS_HPP_
#define DSSLIC_WEIGHTS_HPP_

// Model parameter persistence. Little-endian layout:
//
//   magic "DSLW" | u8 format version | u8 variant | u8 num_labels | u8 alpha
//   u32 meta count   | per entry: u16 name len, name, i64 value
//   u32 block count  | per block: u16 name len, name, u8 ndim, u32 dims...,
//                      raw f32 payload
//
// Training checkpoints are the same container with optimizer-state blocks
// ("opt/...") and bookkeeping meta ("epoch", "adam_t") added.

#include <cstdint>
#include <string>
#include <vector>

namespace dsslic {

struct WeightsBlock {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

struct WeightsFile {
  static constexpr uint8_t kFormatVersion = 1;

  uint8_t variant = 0;
  uint8_t num_labels = 0;
  uint8_t alpha = 8;
  std::vector<std::pair<std::string, int64_t>> meta;
  std::vector<WeightsBlock> blocks;

  void add_meta(const std::string& name, int64_t value) { meta.emplace_back(name, value); }
  const int64_t* find_meta(const std::string& name) const;
  const WeightsBlock* find_block(const std::string& name) const;

  // Serializes to a temp file first and renames into place.
  void save(const std::string& path) const;
  static WeightsFile load(const std::string& path);
};

}  // namespace dsslic

#endif  // DSSLIC_WEIGHTS_HPP_
