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

#ifndef DSSLIC_CONTAINER_HPP_
#define DSSLIC_CONTAINER_HPP_

// Self-describing layered bitstream. Little-endian layout:
//
//   magic "DSSL" | u8 version | u16 h | u16 w | u8 k | u8 num_labels |
//   u8 alpha | f32 residual_min | f32 residual_max | u8 lossless backend id |
//   u8 lossy backend id | u8 quality |
//   u32 len + payload (segmentation) | u32 len + payload (compact) |
//   u32 len + payload (residual)
//
// A zero-length payload marks an absent layer. Any prefix of the layer list
// is independently decodable.

#include <cstdint>
#include <string>

namespace dsslic {

struct LayeredBitstream {
  static constexpr uint8_t kVersion = 1;
  static constexpr size_t kHeaderBytes = 23;       // fixed fields
  static constexpr size_t kLayerPrefixBytes = 12;  // three u32 lengths

  uint16_t h = 0, w = 0;
  uint8_t k = 3;
  uint8_t num_labels = 0;
  uint8_t alpha = 8;
  float residual_min = 0.f, residual_max = 0.f;
  uint8_t lossless_backend = 0;
  uint8_t lossy_backend = 0;
  uint8_t quality = 0;

  std::string seg_payload, compact_payload, residual_payload;

  bool operator==(const LayeredBitstream&) const = default;

  size_t total_bytes() const {
    return kHeaderBytes + kLayerPrefixBytes + seg_payload.size() + compact_payload.size() +
           residual_payload.size();
  }

  std::string serialize() const;
};

struct ParseResult {
  LayeredBitstream bitstream;
  // Resilient parses drop an incomplete trailing residual layer instead of
  // failing; header corruption is fatal in both modes.
  bool residual_truncated = false;
};

enum class ParseMode { kStrict, kResilient };

// Throws DataError on corrupt input: bad magic, unknown version, empty dims,
// bad channel count, non-power-of-two alpha, residual_min > residual_max, or
// payload lengths that disagree with the byte count.
ParseResult parse_container(const std::string& bytes, ParseMode mode = ParseMode::kStrict);

void write_container(const std::string& path, const LayeredBitstream& b);
ParseResult read_container(const std::string& path, ParseMode mode = ParseMode::kStrict);

}  // namespace dsslic

#endif  // DSSLIC_CONTAINER_HPP_
