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

#include "dsslic/metrics.hpp"

#include <cmath>
#include <vector>

namespace dsslic {

double psnr(const ImageU8& x, const ImageU8& y) {
  if (!x.same_shape(y)) throw DataError("psnr: shape mismatch");
  double se = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double d = double(x.v[i]) - double(y.v[i]);
    se += d * d;
  }
  double mse = se / static_cast<double>(x.size());
  if (mse <= 0) return kPsnrCapDb;
  double db = 10.0 * std::log10(255.0 * 255.0 / mse);
  return std::min(db, kPsnrCapDb);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // on the [0,1] range
constexpr double kC2 = 0.03 * 0.03;
const double kScaleWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  Plane() = default;
  Plane(int h_, int w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0.0) {}
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

std::vector<double> gaussian_kernel() {
  std::vector<double> g(kWin);
  double sum = 0;
  for (int i = 0; i < kWin; ++i) {
    double d = i - (kWin - 1) / 2.0;
    g[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// w = filter2(window, img, 'valid')
Plane filter_valid(const Plane& in, const std::vector<double>& g) {
  const int win = static_cast<int>(g.size());
  Plane tmp(in.h, in.w - win + 1);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0;
      for (int k = 0; k < win; ++k) s += g[k] * in.at(y, x + k);
      tmp.at(y, x) = s;
    }
  Plane out(in.h - win + 1, tmp.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0;
      for (int k = 0; k < win; ++k) s += g[k] * tmp.at(y + k, x);
      out.at(y, x) = s;
    }
  return out;
}

Plane downsample2(const Plane& in) {
  Plane out(in.h / 2, in.w / 2);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.at(y, x) =
          (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) + in.at(2 * y + 1, 2 * x) +
           in.at(2 * y + 1, 2 * x + 1)) /
          4.0;
  return out;
}

// Mean per-window SSIM (luminance * cs) and mean contrast*structure term.
void ssim_scale_means(const Plane& a, const Plane& b, const std::vector<double>& g, double* mssim,
                      double* mcs) {
  Plane aa(a.h, a.w), bb(a.h, a.w), ab(a.h, a.w);
  for (size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  // mu1 = filter2(window, img1, 'valid'); etc.
  Plane mu1 = filter_valid(a, g), mu2 = filter_valid(b, g);
  Plane s11 = filter_valid(aa, g), s22 = filter_valid(bb, g), s12 = filter_valid(ab, g);
  double ssim_sum = 0, cssum = 0;
  for (size_t i = 0; i < mu1.v.size(); ++i) {
    double m1 = mu1.v[i], m2 = mu2.v[i];
    double v1 = s11.v[i] - m1 * m1, v2 = s22.v[i] - m2 * m2, cov = s12.v[i] - m1 * m2;
    double l = (2 * m1 * m2 + kC1) / (m1 * m1 + m2 * m2 + kC1);
    double cs = (2 * cov + kC2) / (v1 + v2 + kC2);
    ssim_sum += l * cs;
    cssum += cs;
  }
  *mssim = ssim_sum / static_cast<double>(mu1.v.size());
  *mcs = cssum / static_cast<double>(mu1.v.size());
}

}  // namespace

double ms_ssim(const ImageU8& x, const ImageU8& y, int max_scales) {
  if (!x.same_shape(y)) throw DataError("ms_ssim: shape mismatch");
  if (max_scales < 1 || max_scales > 5) throw DataError("ms_ssim: scales must be in 1..5");
  if (std::min(x.h, x.w) < kWin)
    throw DataError("ms_ssim: image too small for one scale (min dim < 11)");

  // Largest scale count the dims allow: scale m needs min dim >= (win-1)*2^(m-1)+1.
  int scales = 1;
  while (scales < max_scales &&
         std::min(x.h, x.w) >= (kWin - 1) * (1 << scales) + 1)
    ++scales;
  double wsum = 0;
  for (int m = 0; m < scales; ++m) wsum += kScaleWeights[m];

  const auto g = gaussian_kernel();
  double result = 0;
  for (int ci = 0; ci < x.k; ++ci) {
    Plane a(x.h, x.w), b(x.h, x.w);
    for (int yy = 0; yy < x.h; ++yy)
      for (int xx = 0; xx < x.w; ++xx) {
        a.at(yy, xx) = x.at(yy, xx, ci) / 255.0;
        b.at(yy, xx) = y.at(yy, xx, ci) / 255.0;
      }
    double channel = 1.0;
    for (int m = 0; m < scales; ++m) {
      double mssim = 0, mcs = 0;
      ssim_scale_means(a, b, g, &mssim, &mcs);
      double weight = kScaleWeights[m] / wsum;
      if (m + 1 < scales) {
        channel *= std::pow(std::max(mcs, 0.0), weight);
        a = downsample2(a);
        b = downsample2(b);
      } else {
        channel *= std::pow(std::max(mssim, 0.0), weight);
      }
    }
    result += channel;
  }
  result /= x.k;
  return std::clamp(result, 0.0, 1.0);
}

double bpp(size_t bytes, int h, int w, int k) {
  if (h < 1 || w < 1 || k < 1) throw DataError("bpp: dims must be positive");
  return static_cast<double>(bytes) * 8.0 / (static_cast<double>(h) * w * k);
}

}  // namespace dsslic
