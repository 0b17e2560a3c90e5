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

#ifndef DSSLIC_NN_OPS_HPP_
#define DSSLIC_NN_OPS_HPP_

// Numeric kernels behind the network layers: convolution (direct and
// fractional-stride), instance normalization, activations, pooling and
// bilinear resampling, each with its exact adjoint. All kernels are
// deterministic: parallel GEMM partitions outputs, never reductions.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dsslic/tensor.hpp"

namespace dsslic {
namespace ops {

enum class PadMode { kZero, kReflect };

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatCM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Mirror index without border repetition; requires pad <= dim - 1.
inline int reflect_index(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

template <typename T>
TensorT<T> pad2d(const TensorT<T>& x, int pad, PadMode mode) {
  if (pad == 0) return x;
  TensorT<T> out(x.c, x.h + 2 * pad, x.w + 2 * pad);
  for (int ci = 0; ci < x.c; ++ci) {
    for (int y = 0; y < out.h; ++y) {
      int sy = y - pad;
      bool row_in = sy >= 0 && sy < x.h;
      if (mode == PadMode::kReflect) sy = reflect_index(sy, x.h);
      for (int xx = 0; xx < out.w; ++xx) {
        int sx = xx - pad;
        bool col_in = sx >= 0 && sx < x.w;
        if (mode == PadMode::kReflect) sx = reflect_index(sx, x.w);
        if (mode == PadMode::kZero && (!row_in || !col_in)) {
          out.at(ci, y, xx) = T(0);
        } else {
          out.at(ci, y, xx) = x.at(ci, sy, sx);
        }
      }
    }
  }
  return out;
}

// Adjoint of pad2d: folds a padded-size gradient back onto the source dims.
template <typename T>
TensorT<T> pad2d_backward(const TensorT<T>& gp, int pad, PadMode mode, int h, int w) {
  if (pad == 0) return gp;
  TensorT<T> gx(gp.c, h, w);
  for (int ci = 0; ci < gp.c; ++ci) {
    for (int y = 0; y < gp.h; ++y) {
      int sy = y - pad;
      if (mode == PadMode::kZero && (sy < 0 || sy >= h)) continue;
      if (mode == PadMode::kReflect) sy = reflect_index(sy, h);
      for (int xx = 0; xx < gp.w; ++xx) {
        int sx = xx - pad;
        if (mode == PadMode::kZero && (sx < 0 || sx >= w)) continue;
        if (mode == PadMode::kReflect) sx = reflect_index(sx, w);
        gx.at(ci, sy, sx) += gp.at(ci, y, xx);
      }
    }
  }
  return gx;
}

// Column tile width that keeps the im2col buffer around 32 MB.
inline int conv_tile_cols(int rows, int total_cols) {
  int tile = static_cast<int>(std::max<int64_t>(int64_t(256), int64_t(8) * 1024 * 1024 / std::max(rows, 1)));
  return std::min(tile, total_cols);
}

template <typename T>
void im2col_tile(const TensorT<T>& xp, int kh, int kw, int stride, int ow, int col0, int ncols,
                 MatCM<T>& cols) {
  const int rows = xp.c * kh * kw;
  cols.resize(rows, ncols);
  for (int j = 0; j < ncols; ++j) {
    int op = col0 + j;
    int oy = op / ow, ox = op % ow;
    T* dst = cols.data() + static_cast<size_t>(j) * rows;
    for (int ci = 0; ci < xp.c; ++ci) {
      const T* src = xp.data() + (static_cast<size_t>(ci) * xp.h + oy * stride) * xp.w + ox * stride;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) *dst++ = src[ky * xp.w + kx];
      }
    }
  }
}

template <typename T>
void col2im_tile(const MatCM<T>& cols, int kh, int kw, int stride, int ow, int col0, int ncols,
                 TensorT<T>& xp) {
  const int rows = xp.c * kh * kw;
  for (int j = 0; j < ncols; ++j) {
    int op = col0 + j;
    int oy = op / ow, ox = op % ow;
    const T* src = cols.data() + static_cast<size_t>(j) * rows;
    for (int ci = 0; ci < xp.c; ++ci) {
      T* dst = xp.data() + (static_cast<size_t>(ci) * xp.h + oy * stride) * xp.w + ox * stride;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) dst[ky * xp.w + kx] += *src++;
      }
    }
  }
}

// y[co] = sum_ci W[co,ci,:,:] * x[ci] (+ b[co]); W laid out (cout,cin,kh,kw).
template <typename T>
TensorT<T> conv2d_fwd(const TensorT<T>& x, const T* W, const T* b, int cout, int kh, int kw,
                      int stride, int pad, PadMode pm) {
  TensorT<T> xp = pad2d(x, pad, pm);
  const int oh = (xp.h - kh) / stride + 1;
  const int ow = (xp.w - kw) / stride + 1;
  TensorT<T> y(cout, oh, ow);
  const int rows = x.c * kh * kw, total = oh * ow;
  Eigen::Map<const MatRM<T>> Wm(W, cout, rows);
  MatCM<T> cols;
  const int tile = conv_tile_cols(rows, total);
  for (int j0 = 0; j0 < total; j0 += tile) {
    const int jn = std::min(tile, total - j0);
    im2col_tile(xp, kh, kw, stride, ow, j0, jn, cols);
    Eigen::Map<MatRM<T>, 0, Eigen::OuterStride<>> ym(y.data() + j0, cout, jn,
                                                     Eigen::OuterStride<>(total));
    ym.noalias() = Wm * cols;
  }
  if (b != nullptr) {
    for (int co = 0; co < cout; ++co) {
      T* p = y.data() + static_cast<size_t>(co) * total;
      for (int i = 0; i < total; ++i) p[i] += b[co];
    }
  }
  return y;
}

template <typename T>
TensorT<T> conv2d_bwd_data(const TensorT<T>& gy, const T* W, int cin, int cout, int kh, int kw,
                           int stride, int pad, PadMode pm, int in_h, int in_w) {
  const int oh = gy.h, ow = gy.w, total = oh * ow;
  const int rows = cin * kh * kw;
  TensorT<T> gxp(cin, in_h + 2 * pad, in_w + 2 * pad);
  Eigen::Map<const MatRM<T>> Wm(W, cout, rows);
  MatCM<T> gcols;
  const int tile = conv_tile_cols(rows, total);
  for (int j0 = 0; j0 < total; j0 += tile) {
    const int jn = std::min(tile, total - j0);
    Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>> gym(gy.data() + j0, cout, jn,
                                                            Eigen::OuterStride<>(total));
    gcols.resize(rows, jn);
    gcols.noalias() = Wm.transpose() * gym;
    col2im_tile(gcols, kh, kw, stride, ow, j0, jn, gxp);
  }
  return pad2d_backward(gxp, pad, pm, in_h, in_w);
}

template <typename T>
void conv2d_bwd_param(const TensorT<T>& gy, const TensorT<T>& x, T* gW, T* gb, int cout, int kh,
                      int kw, int stride, int pad, PadMode pm) {
  TensorT<T> xp = pad2d(x, pad, pm);
  const int oh = gy.h, ow = gy.w, total = oh * ow;
  const int rows = x.c * kh * kw;
  Eigen::Map<MatRM<T>> gWm(gW, cout, rows);
  MatCM<T> cols;
  const int tile = conv_tile_cols(rows, total);
  for (int j0 = 0; j0 < total; j0 += tile) {
    const int jn = std::min(tile, total - j0);
    im2col_tile(xp, kh, kw, stride, ow, j0, jn, cols);
    Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>> gym(gy.data() + j0, cout, jn,
                                                            Eigen::OuterStride<>(total));
    gWm.noalias() += gym * cols.transpose();
  }
  if (gb != nullptr) {
    for (int co = 0; co < cout; ++co) {
      T s = T(0);
      const T* p = gy.data() + static_cast<size_t>(co) * total;
      for (int i = 0; i < total; ++i) s += p[i];
      gb[co] += s;
    }
  }
}

// Fractional-stride (transposed) convolution; W laid out (cin,cout,kh,kw).
// Output dims: (in-1)*stride - 2*pad + k + out_pad. The forward pass is the
// adjoint of conv2d_fwd, so it is built from the same column machinery.
template <typename T>
TensorT<T> convt2d_fwd(const TensorT<T>& x, const T* W, const T* b, int cout, int kh, int kw,
                       int stride, int pad, int out_pad) {
  const int oh = (x.h - 1) * stride - 2 * pad + kh + out_pad;
  const int ow = (x.w - 1) * stride - 2 * pad + kw + out_pad;
  const int rows = cout * kh * kw, total = x.h * x.w;
  TensorT<T> yp(cout, oh + 2 * pad, ow + 2 * pad);
  Eigen::Map<const MatRM<T>> Wm(W, x.c, rows);
  MatCM<T> cols;
  const int tile = conv_tile_cols(rows, total);
  for (int j0 = 0; j0 < total; j0 += tile) {
    const int jn = std::min(tile, total - j0);
    Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>> xm(x.data() + j0, x.c, jn,
                                                           Eigen::OuterStride<>(total));
    cols.resize(rows, jn);
    cols.noalias() = Wm.transpose() * xm;
    col2im_tile(cols, kh, kw, stride, x.w, j0, jn, yp);
  }
  TensorT<T> y(cout, oh, ow);
  for (int ci = 0; ci < cout; ++ci)
    for (int yy = 0; yy < oh; ++yy)
      for (int xx = 0; xx < ow; ++xx) y.at(ci, yy, xx) = yp.at(ci, yy + pad, xx + pad);
  if (b != nullptr) {
    for (int co = 0; co < cout; ++co) {
      T* p = y.data() + static_cast<size_t>(co) * oh * ow;
      for (int i = 0; i < oh * ow; ++i) p[i] += b[co];
    }
  }
  return y;
}

template <typename T>
TensorT<T> convt2d_bwd_data(const TensorT<T>& gy, const T* W, int cin, int cout, int kh, int kw,
                            int stride, int pad) {
  // d/dx of the adjoint is the direct convolution with the same weights.
  return conv2d_fwd(gy, W, static_cast<const T*>(nullptr), cin, kh, kw, stride, pad,
                    PadMode::kZero);
}

template <typename T>
void convt2d_bwd_param(const TensorT<T>& gy, const TensorT<T>& x, T* gW, T* gb, int cin, int cout,
                       int kh, int kw, int stride, int pad) {
  TensorT<T> gyp = pad2d(gy, pad, PadMode::kZero);
  const int rows = cout * kh * kw, total = x.h * x.w;
  Eigen::Map<MatRM<T>> gWm(gW, cin, rows);
  MatCM<T> cols;
  const int tile = conv_tile_cols(rows, total);
  for (int j0 = 0; j0 < total; j0 += tile) {
    const int jn = std::min(tile, total - j0);
    im2col_tile(gyp, kh, kw, stride, x.w, j0, jn, cols);
    Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>> xm(x.data() + j0, x.c, jn,
                                                           Eigen::OuterStride<>(total));
    gWm.noalias() += xm * cols.transpose();
  }
  if (gb != nullptr) {
    for (int co = 0; co < cout; ++co) {
      T s = T(0);
      const T* p = gy.data() + static_cast<size_t>(co) * gy.plane();
      for (int i = 0; i < gy.plane(); ++i) s += p[i];
      gb[co] += s;
    }
  }
}

// Per-sample, per-channel normalization over the spatial plane (no affine).
template <typename T>
TensorT<T> instance_norm_fwd(const TensorT<T>& x, T eps, std::vector<T>* inv_std_out) {
  TensorT<T> y(x.c, x.h, x.w);
  const int n = x.plane();
  if (inv_std_out != nullptr) inv_std_out->assign(x.c, T(0));
  for (int ci = 0; ci < x.c; ++ci) {
    const T* p = x.data() + static_cast<size_t>(ci) * n;
    T* q = y.data() + static_cast<size_t>(ci) * n;
    T mean = T(0);
    for (int i = 0; i < n; ++i) mean += p[i];
    mean /= static_cast<T>(n);
    T var = T(0);
    for (int i = 0; i < n; ++i) {
      T d = p[i] - mean;
      var += d * d;
    }
    var /= static_cast<T>(n);
    T inv_std = T(1) / std::sqrt(var + eps);
    for (int i = 0; i < n; ++i) q[i] = (p[i] - mean) * inv_std;
    if (inv_std_out != nullptr) (*inv_std_out)[ci] = inv_std;
  }
  return y;
}

template <typename T>
TensorT<T> instance_norm_bwd(const TensorT<T>& gy, const TensorT<T>& y_norm,
                             const std::vector<T>& inv_std) {
  TensorT<T> gx(gy.c, gy.h, gy.w);
  const int n = gy.plane();
  for (int ci = 0; ci < gy.c; ++ci) {
    const T* g = gy.data() + static_cast<size_t>(ci) * n;
    const T* yn = y_norm.data() + static_cast<size_t>(ci) * n;
    T* out = gx.data() + static_cast<size_t>(ci) * n;
    T mean_g = T(0), mean_gy = T(0);
    for (int i = 0; i < n; ++i) {
      mean_g += g[i];
      mean_gy += g[i] * yn[i];
    }
    mean_g /= static_cast<T>(n);
    mean_gy /= static_cast<T>(n);
    for (int i = 0; i < n; ++i) out[i] = inv_std[ci] * (g[i] - mean_g - yn[i] * mean_gy);
  }
  return gx;
}

enum class Act : uint8_t { kNone = 0, kRelu = 1, kLRelu = 2, kTanh = 3 };

template <typename T>
void act_fwd_inplace(TensorT<T>& x, Act act, T lrelu_slope = T(0.2)) {
  switch (act) {
    case Act::kNone:
      return;
    case Act::kRelu:
      for (auto& v : x.v) v = v > T(0) ? v : T(0);
      return;
    case Act::kLRelu:
      for (auto& v : x.v) v = v > T(0) ? v : lrelu_slope * v;
      return;
    case Act::kTanh:
      for (auto& v : x.v) v = std::tanh(v);
      return;
  }
}

// Backward from the activation *output* (monotone in all three cases).
template <typename T>
TensorT<T> act_bwd(const TensorT<T>& gy, const TensorT<T>& y, Act act, T lrelu_slope = T(0.2)) {
  TensorT<T> gx(gy.c, gy.h, gy.w);
  switch (act) {
    case Act::kNone:
      gx = gy;
      return gx;
    case Act::kRelu:
      for (size_t i = 0; i < gy.size(); ++i) gx.v[i] = y.v[i] > T(0) ? gy.v[i] : T(0);
      return gx;
    case Act::kLRelu:
      for (size_t i = 0; i < gy.size(); ++i)
        gx.v[i] = y.v[i] > T(0) ? gy.v[i] : lrelu_slope * gy.v[i];
      return gx;
    case Act::kTanh:
      for (size_t i = 0; i < gy.size(); ++i) gx.v[i] = gy.v[i] * (T(1) - y.v[i] * y.v[i]);
      return gx;
  }
  return gx;
}

// 2x2 stride-2 mean pooling (floor dims).
template <typename T>
TensorT<T> avgpool2_fwd(const TensorT<T>& x) {
  TensorT<T> y(x.c, x.h / 2, x.w / 2);
  for (int ci = 0; ci < x.c; ++ci)
    for (int yy = 0; yy < y.h; ++yy)
      for (int xx = 0; xx < y.w; ++xx)
        y.at(ci, yy, xx) = (x.at(ci, 2 * yy, 2 * xx) + x.at(ci, 2 * yy, 2 * xx + 1) +
                            x.at(ci, 2 * yy + 1, 2 * xx) + x.at(ci, 2 * yy + 1, 2 * xx + 1)) /
                           T(4);
  return y;
}

template <typename T>
TensorT<T> avgpool2_bwd(const TensorT<T>& gy, int in_h, int in_w) {
  TensorT<T> gx(gy.c, in_h, in_w);
  for (int ci = 0; ci < gy.c; ++ci)
    for (int yy = 0; yy < gy.h; ++yy)
      for (int xx = 0; xx < gy.w; ++xx) {
        T g = gy.at(ci, yy, xx) / T(4);
        gx.at(ci, 2 * yy, 2 * xx) += g;
        gx.at(ci, 2 * yy, 2 * xx + 1) += g;
        gx.at(ci, 2 * yy + 1, 2 * xx) += g;
        gx.at(ci, 2 * yy + 1, 2 * xx + 1) += g;
      }
  return gx;
}

// 2x2 stride-2 max pooling; records the winning flat index per output cell.
template <typename T>
TensorT<T> maxpool2_fwd(const TensorT<T>& x, std::vector<int32_t>* argmax) {
  TensorT<T> y(x.c, x.h / 2, x.w / 2);
  if (argmax != nullptr) argmax->assign(y.size(), 0);
  size_t o = 0;
  for (int ci = 0; ci < x.c; ++ci)
    for (int yy = 0; yy < y.h; ++yy)
      for (int xx = 0; xx < y.w; ++xx, ++o) {
        T best = x.at(ci, 2 * yy, 2 * xx);
        int by = 2 * yy, bx = 2 * xx;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            T v = x.at(ci, 2 * yy + dy, 2 * xx + dx);
            if (v > best) {
              best = v;
              by = 2 * yy + dy;
              bx = 2 * xx + dx;
            }
          }
        y.v[o] = best;
        if (argmax != nullptr)
          (*argmax)[o] = static_cast<int32_t>((static_cast<size_t>(ci) * x.h + by) * x.w + bx);
      }
  return y;
}

template <typename T>
TensorT<T> maxpool2_bwd(const TensorT<T>& gy, const std::vector<int32_t>& argmax, int in_h,
                        int in_w) {
  TensorT<T> gx(gy.c, in_h, in_w);
  for (size_t i = 0; i < gy.size(); ++i) gx.v[argmax[i]] += gy.v[i];
  return gx;
}

// Bilinear upsampling by an integer factor, half-pixel-centre convention.
template <typename T>
TensorT<T> upsample_bilinear_fwd(const TensorT<T>& x, int factor) {
  if (factor == 1) return x;
  TensorT<T> y(x.c, x.h * factor, x.w * factor);
  const double inv = 1.0 / factor;
  for (int oy = 0; oy < y.h; ++oy) {
    double sy = (oy + 0.5) * inv - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double wy = sy - y0;
    int y0c = std::clamp(y0, 0, x.h - 1), y1c = std::clamp(y0 + 1, 0, x.h - 1);
    for (int ox = 0; ox < y.w; ++ox) {
      double sx = (ox + 0.5) * inv - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double wx = sx - x0;
      int x0c = std::clamp(x0, 0, x.w - 1), x1c = std::clamp(x0 + 1, 0, x.w - 1);
      for (int ci = 0; ci < x.c; ++ci) {
        double v = (1 - wy) * ((1 - wx) * x.at(ci, y0c, x0c) + wx * x.at(ci, y0c, x1c)) +
                   wy * ((1 - wx) * x.at(ci, y1c, x0c) + wx * x.at(ci, y1c, x1c));
        y.at(ci, oy, ox) = static_cast<T>(v);
      }
    }
  }
  return y;
}

template <typename T>
TensorT<T> upsample_bilinear_bwd(const TensorT<T>& gy, int factor, int in_h, int in_w) {
  if (factor == 1) return gy;
  TensorT<T> gx(gy.c, in_h, in_w);
  const double inv = 1.0 / factor;
  for (int oy = 0; oy < gy.h; ++oy) {
    double sy = (oy + 0.5) * inv - 0.5;
    int y0 = static_cast<int>(std::floor(sy));
    double wy = sy - y0;
    int y0c = std::clamp(y0, 0, in_h - 1), y1c = std::clamp(y0 + 1, 0, in_h - 1);
    for (int ox = 0; ox < gy.w; ++ox) {
      double sx = (ox + 0.5) * inv - 0.5;
      int x0 = static_cast<int>(std::floor(sx));
      double wx = sx - x0;
      int x0c = std::clamp(x0, 0, in_w - 1), x1c = std::clamp(x0 + 1, 0, in_w - 1);
      for (int ci = 0; ci < gy.c; ++ci) {
        double g = gy.at(ci, oy, ox);
        gx.at(ci, y0c, x0c) += static_cast<T>((1 - wy) * (1 - wx) * g);
        gx.at(ci, y0c, x1c) += static_cast<T>((1 - wy) * wx * g);
        gx.at(ci, y1c, x0c) += static_cast<T>(wy * (1 - wx) * g);
        gx.at(ci, y1c, x1c) += static_cast<T>(wy * wx * g);
      }
    }
  }
  return gx;
}

}  // namespace ops
}  // namespace dsslic

#endif  // DSSLIC_NN_OPS_HPP_
