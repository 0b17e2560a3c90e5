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

#ifndef DSSLIC_TENSOR_HPP_
#define DSSLIC_TENSOR_HPP_

#include <cassert>
#include <cstddef>
#include <vector>

#include "dsslic/common.hpp"

namespace dsslic {

// Dense channel-major (C,H,W) activation tensor. float for the runtime
// stack; the double instantiation exists so tests can run the same numeric
// kernels at high precision.
template <typename T>
struct TensorT {
  int c = 0, h = 0, w = 0;
  std::vector<T> v;

  TensorT() = default;
  TensorT(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_) {}

  size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }
  int plane() const { return h * w; }

  T& at(int ci, int y, int x) { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }
  T at(int ci, int y, int x) const { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  bool same_shape(const TensorT& o) const { return c == o.c && h == o.h && w == o.w; }

  void fill(T value) { std::fill(v.begin(), v.end(), value); }

  void add_(const TensorT& o) {
    assert(same_shape(o));
    for (size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  }

  void scale_(T s) {
    for (auto& x : v) x *= s;
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out(c, h, w);
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

template <typename T>
TensorT<T> gaussian_tensor(int c, int h, int w, T sigma, Rng& rng) {
  TensorT<T> t(c, h, w);
  std::normal_distribution<double> dist(0.0, static_cast<double>(sigma));
  for (auto& x : t.v) x = static_cast<T>(dist(rng));
  return t;
}

// Stacks tensors along the channel axis. Spatial dims must agree.
template <typename T>
TensorT<T> concat_channels(const std::vector<const TensorT<T>*>& parts) {
  int c = 0;
  for (const auto* p : parts) c += p->c;
  TensorT<T> out(c, parts[0]->h, parts[0]->w);
  size_t off = 0;
  for (const auto* p : parts) {
    if (p->h != out.h || p->w != out.w) throw DataError("concat_channels: spatial dims disagree");
    std::copy(p->v.begin(), p->v.end(), out.v.begin() + off);
    off += p->v.size();
  }
  return out;
}

// Copies `count` channels starting at `first` out of `t`.
template <typename T>
TensorT<T> slice_channels(const TensorT<T>& t, int first, int count) {
  assert(first >= 0 && first + count <= t.c);
  TensorT<T> out(count, t.h, t.w);
  std::copy(t.v.begin() + static_cast<size_t>(first) * t.plane(),
            t.v.begin() + static_cast<size_t>(first + count) * t.plane(), out.v.begin());
  return out;
}

}  // namespace dsslic

#endif  // DSSLIC_TENSOR_HPP_
