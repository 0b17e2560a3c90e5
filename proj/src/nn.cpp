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

#include "dsslic/nn.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsslic {

namespace {
constexpr float kInstanceNormEps = 1e-5f;
constexpr float kWeightInitSigma = 0.02f;
}  // namespace

void set_num_threads(int n) {
  if (n < 1) n = 1;
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
  Eigen::setNbThreads(n);
}

ConvUnit::ConvUnit(int cin_, int cout_, int kernel_, int stride_, int pad_, PadMode pm,
                   bool transposed_, bool norm_, Act act_, Rng& rng)
    : cin(cin_),
      cout(cout_),
      kernel(kernel_),
      stride(stride_),
      pad(pad_),
      pad_mode(pm),
      transposed(transposed_),
      norm(norm_),
      act(act_) {
  const size_t wn = static_cast<size_t>(cin) * cout * kernel * kernel;
  weight.shape = transposed ? std::vector<int>{cin, cout, kernel, kernel}
                            : std::vector<int>{cout, cin, kernel, kernel};
  weight.w.resize(wn);
  weight.g.assign(wn, 0.f);
  std::normal_distribution<double> dist(0.0, kWeightInitSigma);
  for (auto& x : weight.w) x = static_cast<float>(dist(rng));
  bias.shape = {cout};
  bias.w.assign(cout, 0.f);
  bias.g.assign(cout, 0.f);
}

Tensor ConvUnit::forward(const Tensor& x, UnitCache* cc) {
  Tensor y = transposed ? ops::convt2d_fwd(x, weight.w.data(), bias.w.data(), cout, kernel, kernel,
                                           stride, pad, /*out_pad=*/1)
                        : ops::conv2d_fwd(x, weight.w.data(), bias.w.data(), cout, kernel, kernel,
                                          stride, pad, pad_mode);
  if (cc != nullptr) cc->in = x;
  if (norm) {
    y = ops::instance_norm_fwd(y, kInstanceNormEps, cc != nullptr ? &cc->inv_std : nullptr);
    if (cc != nullptr) cc->normed = y;
  }
  ops::act_fwd_inplace(y, act);
  if (cc != nullptr && act != Act::kNone) cc->out = y;
  return y;
}

Tensor ConvUnit::backward(const Tensor& gy, const UnitCache& cc) {
  Tensor g = act != Act::kNone ? ops::act_bwd(gy, cc.out, act) : gy;
  if (norm) g = ops::instance_norm_bwd(g, cc.normed, cc.inv_std);
  if (transposed) {
    ops::convt2d_bwd_param(g, cc.in, weight.g.data(), bias.g.data(), cin, cout, kernel, kernel,
                           stride, pad);
    return ops::convt2d_bwd_data(g, weight.w.data(), cin, cout, kernel, kernel, stride, pad);
  }
  ops::conv2d_bwd_param(g, cc.in, weight.g.data(), bias.g.data(), cout, kernel, kernel, stride,
                        pad, pad_mode);
  return ops::conv2d_bwd_data(g, weight.w.data(), cin, cout, kernel, kernel, stride, pad, pad_mode,
                              cc.in.h, cc.in.w);
}

void ConvUnit::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

ResidualUnit::ResidualUnit(int channels, Rng& rng)
    : conv0(channels, channels, 3, 1, 1, PadMode::kReflect, false, true, Act::kRelu, rng),
      conv1(channels, channels, 3, 1, 1, PadMode::kReflect, false, true, Act::kNone, rng) {}

Tensor ResidualUnit::forward(const Tensor& x, UnitCache* cc) {
  if (cc != nullptr) cc->sub.resize(2);
  Tensor b = conv0.forward(x, cc != nullptr ? &cc->sub[0] : nullptr);
  b = conv1.forward(b, cc != nullptr ? &cc->sub[1] : nullptr);
  b.add_(x);
  return b;
}

Tensor ResidualUnit::backward(const Tensor& gy, const UnitCache& cc) {
  Tensor g = conv1.backward(gy, cc.sub[1]);
  g = conv0.backward(g, cc.sub[0]);
  g.add_(gy);  // skip connection
  return g;
}

void ResidualUnit::collect(std::vector<Parameter*>& out) {
  conv0.collect(out);
  conv1.collect(out);
}

Tensor MaxPoolUnit::forward(const Tensor& x, UnitCache* cc) {
  if (cc != nullptr) {
    cc->in = x;
    return ops::maxpool2_fwd(x, &cc->argmax);
  }
  return ops::maxpool2_fwd<float>(x, nullptr);
}

Tensor MaxPoolUnit::backward(const Tensor& gy, const UnitCache& cc) {
  return ops::maxpool2_bwd(gy, cc.argmax, cc.in.h, cc.in.w);
}

Tensor SequentialNet::forward(const Tensor& x, NetCache* cc) {
  return forward_tapped(x, 0, nullptr, cc);
}

Tensor SequentialNet::forward_tapped(const Tensor& x, int taps, std::vector<Tensor>* tap_out,
                                     NetCache* cc) {
  if (cc != nullptr) cc->units.resize(units.size());
  if (tap_out != nullptr) tap_out->clear();
  Tensor y = x;
  for (size_t i = 0; i < units.size(); ++i) {
    y = units[i]->forward(y, cc != nullptr ? &cc->units[i] : nullptr);
    if (tap_out != nullptr && static_cast<int>(i) < taps) tap_out->push_back(y);
  }
  return y;
}

Tensor SequentialNet::backward(const Tensor& gy, const NetCache& cc) {
  return backward_tapped(gy, nullptr, cc);
}

Tensor SequentialNet::backward_tapped(const Tensor& gy, const std::vector<Tensor>* tap_grads,
                                      const NetCache& cc) {
  Tensor g = gy;
  for (size_t i = units.size(); i-- > 0;) {
    if (tap_grads != nullptr && i < tap_grads->size() && !(*tap_grads)[i].empty())
      g.add_((*tap_grads)[i]);
    g = units[i]->backward(g, cc.units[i]);
  }
  return g;
}

std::vector<Parameter*> SequentialNet::params() {
  std::vector<Parameter*> out;
  for (auto& u : units) u->collect(out);
  return out;
}

void SequentialNet::zero_grad() {
  for (auto* p : params()) p->zero_grad();
}

void SequentialNet::assign_names(const std::string& prefix) {
  for (auto& u : units) {
    std::vector<Parameter*> ps;
    u->collect(ps);
    // ConvUnit contributes (w, b); ResidualUnit contributes (w, b, w, b).
    for (size_t i = 0; i < ps.size(); ++i) {
      std::string leaf = (i % 2 == 0) ? "w" : "b";
      std::string sub = ps.size() > 2 ? std::to_string(i / 2) + "/" : "";
      ps[i]->name = prefix + "/" + u->name + "/" + sub + leaf;
    }
  }
}

void Adam::step(const std::vector<Parameter*>& params, double lr) {
  ++t;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
  for (Parameter* p : params) {
    if (p->m.size() != p->w.size()) {
      p->m.assign(p->w.size(), 0.f);
      p->v.assign(p->w.size(), 0.f);
    }
    const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
    for (size_t i = 0; i < p->w.size(); ++i) {
      float g = p->g[i];
      p->m[i] = b1 * p->m[i] + (1.f - b1) * g;
      p->v[i] = b2 * p->v[i] + (1.f - b2) * g * g;
      double mh = p->m[i] / bc1;
      double vh = p->v[i] / bc2;
      p->w[i] -= static_cast<float>(lr * mh / (std::sqrt(vh) + eps_));
    }
  }
}

}  // namespace dsslic
