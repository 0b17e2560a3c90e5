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

#include "dsslic/losses.hpp"

#include <cmath>

#include "dsslic/weights.hpp"

namespace dsslic {

namespace {

// Stability constants on the [0,1] dynamic range; C3 = C2/2 collapses the
// contrast*structure product to the usual (2*cov + C2)/(var_sum + C2) form.
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kC3 = kC2 / 2.0;
constexpr double kSigmoidClamp = 1e-7;

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b)) throw DataError(std::string(who) + ": shape mismatch");
}

double clamped_sigmoid(double s) {
  double p = 1.0 / (1.0 + std::exp(-s));
  if (p < kSigmoidClamp) return kSigmoidClamp;
  if (p > 1.0 - kSigmoidClamp) return 1.0 - kSigmoidClamp;
  return p;
}

bool sigmoid_saturated(double s) {
  double p = 1.0 / (1.0 + std::exp(-s));
  return p <= kSigmoidClamp || p >= 1.0 - kSigmoidClamp;
}

}  // namespace

double l1_loss(const Tensor& x, const Tensor& x_hat, double lambda, Tensor* grad_xh) {
  require_same_shape(x, x_hat, "l1_loss");
  const double n = static_cast<double>(x.size());
  double acc = 0;
  for (size_t i = 0; i < x.size(); ++i) acc += std::abs(double(x.v[i]) - double(x_hat.v[i]));
  if (grad_xh != nullptr) {
    *grad_xh = Tensor(x.c, x.h, x.w);
    const double s = 2.0 * lambda / n;
    for (size_t i = 0; i < x.size(); ++i) {
      double d = double(x_hat.v[i]) - double(x.v[i]);
      grad_xh->v[i] = static_cast<float>(d > 0 ? s : (d < 0 ? -s : 0.0));
    }
  }
  return 2.0 * lambda * acc / n;
}

// ---------------------------------------------------------------------------
// SSIM

namespace {

// [-1,1] -> [0,1]
inline double unit01(float v) { return (double(v) + 1.0) * 0.5; }

std::vector<double> gaussian_window(int win, double sigma) {
  std::vector<double> g(win);
  double sum = 0, c = (win - 1) / 2.0;
  for (int i = 0; i < win; ++i) {
    g[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

int ssim_window_size(int h, int w) {
  int win = std::min({11, h, w});
  if (win % 2 == 0) --win;
  return std::max(win, 1);
}

struct Field {
  int h = 0, w = 0;
  std::vector<double> v;
  Field() = default;
  Field(int h_, int w_) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, 0.0) {}
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

// Separable valid-window correlation: out is (h-win+1) x (w-win+1).
Field filter_valid(const Field& in, const std::vector<double>& g) {
  const int win = static_cast<int>(g.size());
  Field tmp(in.h, in.w - win + 1);
  for (int y = 0; y < in.h; ++y)
    for (int ox = 0; ox < tmp.w; ++ox) {
      double s = 0;
      for (int k = 0; k < win; ++k) s += g[k] * in.at(y, ox + k);
      tmp.at(y, ox) = s;
    }
  Field out(in.h - win + 1, tmp.w);
  for (int oy = 0; oy < out.h; ++oy)
    for (int ox = 0; ox < out.w; ++ox) {
      double s = 0;
      for (int k = 0; k < win; ++k) s += g[k] * tmp.at(oy + k, ox);
      out.at(oy, ox) = s;
    }
  return out;
}

// Adjoint of filter_valid: scatters a window-grid field back to pixels.
Field filter_valid_adjoint(const Field& f, const std::vector<double>& g, int h, int w) {
  const int win = static_cast<int>(g.size());
  Field tmp(h, f.w);
  for (int oy = 0; oy < f.h; ++oy)
    for (int ox = 0; ox < f.w; ++ox) {
      double v = f.at(oy, ox);
      for (int k = 0; k < win; ++k) tmp.at(oy + k, ox) += g[k] * v;
    }
  Field out(h, w);
  for (int y = 0; y < h; ++y)
    for (int ox = 0; ox < f.w; ++ox) {
      double v = tmp.at(y, ox);
      for (int k = 0; k < win; ++k) out.at(y, ox + k) += g[k] * v;
    }
  return out;
}

}  // namespace

SsimComponents ssim_components(const Tensor& x, const Tensor& x_hat) {
  require_same_shape(x, x_hat, "ssim_components");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += unit01(x.v[i]);
    my += unit01(x_hat.v[i]);
  }
  mx /= n;
  my /= n;
  double vx = 0, vy = 0, cov = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double a = unit01(x.v[i]) - mx, b = unit01(x_hat.v[i]) - my;
    vx += a * a;
    vy += b * b;
    cov += a * b;
  }
  vx /= n;
  vy /= n;
  cov /= n;
  double sx = std::sqrt(vx), sy = std::sqrt(vy);
  SsimComponents out;
  out.luminance = (2 * mx * my + kC1) / (mx * mx + my * my + kC1);
  out.contrast = (2 * sx * sy + kC2) / (vx + vy + kC2);
  out.structure = (cov + kC3) / (sx * sy + kC3);
  return out;
}

double ssim_loss(const Tensor& x, const Tensor& x_hat, Tensor* grad_xh) {
  require_same_shape(x, x_hat, "ssim_loss");
  const int h = x.h, w = x.w;
  const int win = ssim_window_size(h, w);
  const auto g = gaussian_window(win, 1.5);
  const int oh = h - win + 1, ow = w - win + 1;
  const double count = static_cast<double>(x.c) * oh * ow;

  if (grad_xh != nullptr) {
    *grad_xh = Tensor(x.c, h, w);
    grad_xh->fill(0.f);
  }

  double total = 0;
  for (int ci = 0; ci < x.c; ++ci) {
    Field fx(h, w), fy(h, w), fxx(h, w), fyy(h, w), fxy(h, w);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) {
        double a = unit01(x.at(ci, yy, xx)), b = unit01(x_hat.at(ci, yy, xx));
        fx.at(yy, xx) = a;
        fy.at(yy, xx) = b;
        fxx.at(yy, xx) = a * a;
        fyy.at(yy, xx) = b * b;
        fxy.at(yy, xx) = a * b;
      }
    Field mu_x = filter_valid(fx, g), mu_y = filter_valid(fy, g);
    Field sxx = filter_valid(fxx, g), syy = filter_valid(fyy, g), sxy = filter_valid(fxy, g);

    // Per-window SSIM and the three gradient fields.
    Field f1(oh, ow), f2(oh, ow), f3(oh, ow);
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double mx = mu_x.at(oy, ox), my = mu_y.at(oy, ox);
        double vx = sxx.at(oy, ox) - mx * mx;
        double vy = syy.at(oy, ox) - my * my;
        double cov = sxy.at(oy, ox) - mx * my;
        double a1 = 2 * mx * my + kC1, a2 = 2 * cov + kC2;
        double b1 = mx * mx + my * my + kC1, b2 = vx + vy + kC2;
        double ssim = (a1 * a2) / (b1 * b2);
        total += ssim;
        if (grad_xh != nullptr) {
          double dS_dmy = 2 * mx * a2 / (b1 * b2) - ssim * 2 * my / b1;
          double dS_dvy = -ssim / b2;
          double dS_dcov = 2 * a1 / (b1 * b2);
          f2.at(oy, ox) = 2 * dS_dvy;
          f3.at(oy, ox) = dS_dcov;
          f1.at(oy, ox) = dS_dmy - 2 * dS_dvy * my - dS_dcov * mx;
        }
      }

    if (grad_xh != nullptr) {
      Field a1 = filter_valid_adjoint(f1, g, h, w);
      Field a2 = filter_valid_adjoint(f2, g, h, w);
      Field a3 = filter_valid_adjoint(f3, g, h, w);
      // d(loss)/d(x_hat) = -(1/count) * dSSIM/d(y01) * d(y01)/d(x_hat).
      for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
          double gq = a1.at(yy, xx) + fy.at(yy, xx) * a2.at(yy, xx) + fx.at(yy, xx) * a3.at(yy, xx);
          grad_xh->at(ci, yy, xx) = static_cast<float>(-gq / count * 0.5);
        }
    }
  }
  return -total / count;
}

// ---------------------------------------------------------------------------
// Feature matching / perceptual

double feature_matching_loss(const FeatureSet& real, const FeatureSet& fake, double lambda,
                             FeatureSet* grad_fake) {
  if (real.size() != fake.size()) throw DataError("feature_matching_loss: scale count mismatch");
  if (grad_fake != nullptr) grad_fake->assign(fake.size(), {});
  double total = 0;
  for (size_t d = 0; d < real.size(); ++d) {
    if (real[d].size() != fake[d].size())
      throw DataError("feature_matching_loss: layer count mismatch");
    if (grad_fake != nullptr) (*grad_fake)[d].resize(fake[d].size());
    for (size_t i = 0; i < real[d].size(); ++i) {
      const Tensor& r = real[d][i];
      const Tensor& f = fake[d][i];
      require_same_shape(r, f, "feature_matching_loss");
      const double n = static_cast<double>(r.size());
      double acc = 0;
      for (size_t j = 0; j < r.size(); ++j) acc += std::abs(double(r.v[j]) - double(f.v[j]));
      total += acc / n;
      if (grad_fake != nullptr) {
        Tensor& gf = (*grad_fake)[d][i];
        gf = Tensor(f.c, f.h, f.w);
        const double s = lambda / n;
        for (size_t j = 0; j < r.size(); ++j) {
          double diff = double(f.v[j]) - double(r.v[j]);
          gf.v[j] = static_cast<float>(diff > 0 ? s : (diff < 0 ? -s : 0.0));
        }
      }
    }
  }
  return lambda * total;
}

VggExtractor::VggExtractor(uint64_t seed) {
  // Convolutional stack of the 19-layer configuration up to the fifth
  // block's first activation; taps at relu1_1..relu5_1.
  struct Item {
    int ch;
    bool pool;
  };
  const std::vector<Item> plan = {{64, false},  {64, false},  {0, true},   {128, false},
                                  {128, false}, {0, true},    {256, false}, {256, false},
                                  {256, false}, {256, false}, {0, true},   {512, false},
                                  {512, false}, {512, false}, {512, false}, {0, true},
                                  {512, false}};
  Rng rng = make_rng(seed, 7);
  int cin = 3, conv_idx = 0;
  for (size_t i = 0; i < plan.size(); ++i) {
    std::unique_ptr<Unit> u;
    char name[32];
    if (plan[i].pool) {
      u = std::make_unique<MaxPoolUnit>();
      std::snprintf(name, sizeof(name), "%02zu_pool", i);
    } else {
      u = std::make_unique<ConvUnit>(cin, plan[i].ch, 3, 1, 1, PadMode::kZero, false, false,
                                     Act::kRelu, rng);
      std::snprintf(name, sizeof(name), "%02zu_c%d", i, plan[i].ch);
      cin = plan[i].ch;
      ++conv_idx;
      if (conv_idx == 1 || conv_idx == 3 || conv_idx == 5 || conv_idx == 9 || conv_idx == 13)
        tap_units.push_back(static_cast<int>(i));
    }
    u->name = name;
    net.units.push_back(std::move(u));
  }
  net.assign_names("vgg");
}

VggExtractor VggExtractor::from_weights(const std::string& path) {
  VggExtractor ex(0);
  WeightsFile wf = WeightsFile::load(path);
  for (Parameter* p : ex.net.params()) {
    const WeightsBlock* b = wf.find_block(p->name);
    if (b == nullptr) throw DataError("feature-extractor weights missing block: " + p->name);
    if (b->shape != p->shape)
      throw DataError("feature-extractor weights shape mismatch: " + p->name);
    p->w = b->data;
  }
  return ex;
}

std::vector<Tensor> VggExtractor::features(const Tensor& x, NetCache* cc) {
  if (cc != nullptr) cc->units.resize(net.units.size());
  std::vector<Tensor> taps;
  Tensor y = x;
  size_t next_tap = 0;
  for (size_t i = 0; i < net.units.size(); ++i) {
    y = net.units[i]->forward(y, cc != nullptr ? &cc->units[i] : nullptr);
    if (next_tap < tap_units.size() && static_cast<int>(i) == tap_units[next_tap]) {
      taps.push_back(y);
      ++next_tap;
    }
    if (next_tap == tap_units.size()) break;
  }
  return taps;
}

Tensor VggExtractor::backward(const std::vector<Tensor>& g_feats, const NetCache& cc) {
  Tensor g;
  for (int i = tap_units.back(); i >= 0; --i) {
    // Inject the gradient of any tap living at this unit's output.
    for (size_t k = 0; k < tap_units.size(); ++k) {
      if (tap_units[k] != i) continue;
      if (g.empty())
        g = g_feats[k];
      else
        g.add_(g_feats[k]);
    }
    g = net.units[i]->backward(g, cc.units[i]);
  }
  return g;
}

double vgg_perceptual_loss(const Tensor& x, const Tensor& x_hat, FeatureExtractor& extractor,
                           double lambda, Tensor* grad_xh) {
  require_same_shape(x, x_hat, "vgg_perceptual_loss");
  std::vector<Tensor> fx;
  try {
    fx = extractor.features(x, nullptr);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(std::string("feature extractor failed: ") + e.what());
  }
  NetCache cache;
  std::vector<Tensor> fy = extractor.features(x_hat, grad_xh != nullptr ? &cache : nullptr);
  if (fx.size() != fy.size()) throw DataError("vgg_perceptual_loss: tap count mismatch");

  double total = 0;
  std::vector<Tensor> g_feats(fy.size());
  for (size_t j = 0; j < fx.size(); ++j) {
    require_same_shape(fx[j], fy[j], "vgg_perceptual_loss");
    const double n = static_cast<double>(fx[j].size());
    double acc = 0;
    for (size_t i = 0; i < fx[j].size(); ++i)
      acc += std::abs(double(fx[j].v[i]) - double(fy[j].v[i]));
    total += acc / n;
    if (grad_xh != nullptr) {
      g_feats[j] = Tensor(fy[j].c, fy[j].h, fy[j].w);
      const double s = lambda / n;
      for (size_t i = 0; i < fx[j].size(); ++i) {
        double diff = double(fy[j].v[i]) - double(fx[j].v[i]);
        g_feats[j].v[i] = static_cast<float>(diff > 0 ? s : (diff < 0 ? -s : 0.0));
      }
    }
  }
  if (grad_xh != nullptr) *grad_xh = extractor.backward(g_feats, cache);
  return lambda * total;
}

// ---------------------------------------------------------------------------
// Adversarial

double discriminator_loss(const ScoreMaps& scores_real, const ScoreMaps& scores_fake,
                          ScoreMaps* grad_real, ScoreMaps* grad_fake) {
  if (scores_real.size() != scores_fake.size())
    throw DataError("discriminator_loss: scale count mismatch");
  if (grad_real != nullptr) grad_real->assign(scores_real.size(), {});
  if (grad_fake != nullptr) grad_fake->assign(scores_fake.size(), {});
  double total = 0;
  for (size_t d = 0; d < scores_real.size(); ++d) {
    const Tensor& r = scores_real[d];
    const Tensor& f = scores_fake[d];
    const double nr = static_cast<double>(r.size()), nf = static_cast<double>(f.size());
    double acc_r = 0, acc_f = 0;
    for (float s : r.v) acc_r += std::log(clamped_sigmoid(s));
    for (float s : f.v) acc_f += std::log(1.0 - clamped_sigmoid(s));
    total -= acc_r / nr + acc_f / nf;
    if (grad_real != nullptr) {
      Tensor& gr = (*grad_real)[d];
      gr = Tensor(r.c, r.h, r.w);
      for (size_t i = 0; i < r.size(); ++i)
        gr.v[i] = sigmoid_saturated(r.v[i])
                      ? 0.f
                      : static_cast<float>(-(1.0 - clamped_sigmoid(r.v[i])) / nr);
    }
    if (grad_fake != nullptr) {
      Tensor& gf = (*grad_fake)[d];
      gf = Tensor(f.c, f.h, f.w);
      for (size_t i = 0; i < f.size(); ++i)
        gf.v[i] =
            sigmoid_saturated(f.v[i]) ? 0.f : static_cast<float>(clamped_sigmoid(f.v[i]) / nf);
    }
  }
  return total;
}

double generator_adversarial_loss(const ScoreMaps& scores_fake, ScoreMaps* grad_fake) {
  if (grad_fake != nullptr) grad_fake->assign(scores_fake.size(), {});
  double total = 0;
  for (size_t d = 0; d < scores_fake.size(); ++d) {
    const Tensor& f = scores_fake[d];
    const double n = static_cast<double>(f.size());
    double acc = 0;
    for (float s : f.v) acc += std::log(clamped_sigmoid(s));
    total -= acc / n;
    if (grad_fake != nullptr) {
      Tensor& gf = (*grad_fake)[d];
      gf = Tensor(f.c, f.h, f.w);
      for (size_t i = 0; i < f.size(); ++i)
        gf.v[i] = sigmoid_saturated(f.v[i])
                      ? 0.f
                      : static_cast<float>(-(1.0 - clamped_sigmoid(f.v[i])) / n);
    }
  }
  return total;
}

double generator_loss(const ScoreMaps& scores_fake, double l1, double ssim, double dis, double vgg,
                      const LossWeights& weights) {
  double adv = generator_adversarial_loss(scores_fake);
  double total = adv + l1 + ssim;
  if (weights.include_perceptual) total += dis + vgg;
  return total;
}

LossReport compose_report(double l1, double ssim, double dis, double vgg, double adv_g,
                          double d_loss, bool include_perceptual) {
  LossReport r;
  r.l1 = l1;
  r.ssim = ssim;
  r.dis = dis;
  r.vgg = vgg;
  r.adv_g = adv_g;
  r.d_loss = d_loss;
  r.g_total = adv_g + l1 + ssim + (include_perceptual ? dis + vgg : 0.0);
  r.hybrid = r.d_loss + r.g_total;
  return r;
}

}  // namespace dsslic
