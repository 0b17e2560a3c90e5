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

#ifndef DSSLIC_METRICS_HPP_
#define DSSLIC_METRICS_HPP_

#include <cstddef>

#include "dsslic/image.hpp"

namespace dsslic {

// PSNR cap reported for identical images, so averages stay finite.
inline constexpr double kPsnrCapDb = 99.0;

// 10*log10(255^2 / MSE) with the MSE taken jointly over all channels.
double psnr(const ImageU8& x, const ImageU8& y);

// Multi-scale structural similarity, up to five scales with the standard
// weights; the scale count drops (weights renormalized) when the image is
// too small. Returns a value in [0,1].
double ms_ssim(const ImageU8& x, const ImageU8& y, int max_scales = 5);

// Bits per pixel per channel.
double bpp(size_t bytes, int h, int w, int k);

}  // namespace dsslic

#endif  // DSSLIC_METRICS_HPP_
