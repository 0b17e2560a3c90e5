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

#ifndef DSSLIC_IMAGE_HPP_
#define DSSLIC_IMAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dsslic/tensor.hpp"

namespace dsslic {

// 8-bit interleaved image (row-major, RGB or grayscale). The codec boundary
// type: metrics and file I/O speak this, the networks speak ImagePlane.
struct ImageU8 {
  int h = 0, w = 0, k = 0;
  std::vector<uint8_t> v;

  ImageU8() = default;
  ImageU8(int h_, int w_, int k_) : h(h_), w(w_), k(k_), v(static_cast<size_t>(h_) * w_ * k_) {}

  uint8_t& at(int y, int x, int ci) { return v[(static_cast<size_t>(y) * w + x) * k + ci]; }
  uint8_t at(int y, int x, int ci) const { return v[(static_cast<size_t>(y) * w + x) * k + ci]; }
  size_t size() const { return v.size(); }
  bool same_shape(const ImageU8& o) const { return h == o.h && w == o.w && k == o.k; }
};

struct ValueRange {
  float lo = -1.f, hi = 1.f;
};

enum class Colorspace : uint8_t { kRGB = 0 };

// Real-valued image plane in a declared range; channel-major storage.
struct ImagePlane {
  Tensor data;  // (k, h, w)
  ValueRange range;
  Colorspace colorspace = Colorspace::kRGB;

  int channels() const { return data.c; }
  int height() const { return data.h; }
  int width() const { return data.w; }
};

// Throws DataError unless dims are sane (h,w >= 1, k in {1,3}) and every
// element lies inside the declared range.
void validate(const ImagePlane& p);

// Integer label field with its label-count metadata.
struct SegmentationMap {
  int h = 0, w = 0;
  int num_labels = 0;
  std::vector<int32_t> labels;

  SegmentationMap() = default;
  SegmentationMap(int h_, int w_, int num_labels_)
      : h(h_), w(w_), num_labels(num_labels_), labels(static_cast<size_t>(h_) * w_, 0) {}

  int32_t& at(int y, int x) { return labels[static_cast<size_t>(y) * w + x]; }
  int32_t at(int y, int x) const { return labels[static_cast<size_t>(y) * w + x]; }
};

void validate(const SegmentationMap& s);

// u8 <-> canonical [-1,1] float conversions. quantize is the exact inverse
// of dequantize on the u8 grid.
ImagePlane to_plane(const ImageU8& img);
ImageU8 to_u8(const ImagePlane& p);
float dequantize_u8(uint8_t u);
uint8_t quantize_unit(float v);  // v in [-1,1] -> round((v+1)*127.5), clamped

// Bottom/right zero padding of the canonical plane up to a multiple of m,
// and the matching crop.
Tensor pad_to_multiple(const Tensor& t, int m);
SegmentationMap pad_to_multiple(const SegmentationMap& s, int m);
Tensor crop(const Tensor& t, int h, int w);

// File I/O (PNG/JPEG/... by extension, via OpenCV). Images load as RGB.
ImageU8 load_image(const std::string& path);
void save_image(const std::string& path, const ImageU8& img);
ImageU8 resize_image(const ImageU8& img, int out_h, int out_w, bool nearest);

// Single-channel 8/16-bit label image I/O for precomputed segmentation maps.
SegmentationMap load_label_map(const std::string& path, int num_labels);
void save_label_map(const std::string& path, const SegmentationMap& s);

}  // namespace dsslic

#endif  // DSSLIC_IMAGE_HPP_
