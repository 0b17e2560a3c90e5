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

#ifndef DSSLIC_CODEC_HPP_
#define DSSLIC_CODEC_HPP_

// The layered codec: a losslessly coded segmentation base layer, a lossless
// compact-image enhancement layer, and a lossy min-max-normalized residual
// layer on top of the shared coarse reconstruction
//
//   x' = upsample(c) + FineNet(s, upsample(c))
//
// which encoder and decoder compute bit-identically from decoded inputs.

#include <optional>

#include "dsslic/backends.hpp"
#include "dsslic/container.hpp"
#include "dsslic/networks.hpp"

namespace dsslic {

// Bilinear upsampling of the compact representation back to full size.
Tensor upsample_compact(const Tensor& c, int alpha);

// Coarse reconstruction at padded dims, clipped to [-1,1]. seg may be null
// for noSeg bundles; c must already be the decoded compact representation.
Tensor recnet(NetworkBundle& nets, const SegmentationMap* seg, const Tensor& c);

// Min-max normalization of a real-valued array onto the 8-bit range:
// scaled = round((r - min) / (max - min) * 255). A constant array (min ==
// max) maps to zeros and denormalizes back to the constant.
struct MinMaxScaled {
  std::vector<uint8_t> scaled;
  float min = 0.f, max = 0.f;
};
MinMaxScaled minmax_normalize(const std::vector<float>& r);
MinMaxScaled minmax_normalize(const std::vector<float>& r, float min, float max);
// Exact inverse of the affine map up to half a quantization step. Throws
// DataError when min > max (corrupt container).
std::vector<float> minmax_denormalize(const std::vector<uint8_t>& scaled, float min, float max);

struct DecodeResult {
  ImageU8 image;
  bool residual_dropped = false;  // resilient decode hit a truncated layer
};

struct LayerBreakdown {
  size_t seg_bytes = 0, compact_bytes = 0, residual_bytes = 0, header_bytes = 0;
  size_t total() const { return seg_bytes + compact_bytes + residual_bytes + header_bytes; }
};

// One encode/decode configuration: a trained bundle, the backends, and the
// variant-dependent layer selection.
class Pipeline {
 public:
  Pipeline(NetworkBundle* nets, const BackendRegistry* backends)
      : nets_(nets), backends_(backends) {}

  int quality = 28;
  bool include_residual = true;
  const SegnetAdapter* segnet = nullptr;  // needed by seg-conditioned encodes

  // id keys the precomputed-segmentation lookup. For noSeg bundles the
  // segmentation layer is left absent.
  LayeredBitstream encode(const ImageU8& x, const std::string& id) const;
  // Bypasses the adapter (callers that already hold the map).
  LayeredBitstream encode_with_map(const ImageU8& x, const SegmentationMap* seg) const;

  DecodeResult decode(const LayeredBitstream& b) const;
  DecodeResult decode_bytes(const std::string& bytes, ParseMode mode) const;

  // Reconstruction from the first `layers` coded layers (1: segmentation
  // only, 2: + compact, 3: + residual).
  ImageU8 reconstruct_prefix(const LayeredBitstream& b, int layers) const;

  NetworkBundle& nets() const { return *nets_; }

 private:
  NetworkBundle* nets_;
  const BackendRegistry* backends_;
};

// Builds the pipeline for one ablation variant, checking that the loaded
// weights were trained for that variant.
Pipeline pipeline_variant(Variant variant, NetworkBundle* nets, const BackendRegistry* backends);

LayerBreakdown layer_breakdown(const LayeredBitstream& b);

}  // namespace dsslic

#endif  // DSSLIC_CODEC_HPP_
