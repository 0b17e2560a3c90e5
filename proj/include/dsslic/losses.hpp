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

#ifndef DSSLIC_LOSSES_HPP_
#define DSSLIC_LOSSES_HPP_

// Training objective: an L1 + SSIM reconstruction core, discriminator
// feature-matching and pretrained-feature perceptual terms, and the
// adversarial pair. Every norm is mean-normalized (per element) so the term
// weights are resolution-independent. All reductions run in double and each
// differentiable term exposes its analytic gradient.

#include <memory>
#include <vector>

#include "dsslic/nn.hpp"
#include "dsslic/tensor.hpp"

namespace dsslic {

struct LossWeights {
  double lambda = 10.0;            // weight of the L1, feature-matching and VGG terms
  bool include_perceptual = true;  // schedule hook: drops L_DIS and L_VGG when false
};

// Per-term values for one training step. g_total is the generator objective
// (sum of its included terms); hybrid = d_loss + g_total.
struct LossReport {
  double l1 = 0, ssim = 0, dis = 0, vgg = 0;
  double adv_g = 0, d_loss = 0;
  double g_total = 0, hybrid = 0;
};

// Raw (pre-sigmoid) score maps, one per discriminator scale.
using ScoreMaps = std::vector<Tensor>;
// Intermediate feature maps: [scale][layer].
using FeatureSet = std::vector<std::vector<Tensor>>;

// 2*lambda*mean|x - x_hat|. grad_xh, when given, receives d/d x_hat.
double l1_loss(const Tensor& x, const Tensor& x_hat, double lambda, Tensor* grad_xh = nullptr);

// Luminance/contrast/structure comparison over whole-image statistics,
// computed on values mapped from [-1,1] to [0,1].
struct SsimComponents {
  double luminance = 0, contrast = 0, structure = 0;
};
SsimComponents ssim_components(const Tensor& x, const Tensor& x_hat);

// Negative mean of the per-window luminance*contrast*structure product over
// valid 11x11 Gaussian windows (sigma 1.5; the window shrinks to fit small
// inputs). Value lies in [-1, 1]; -1 at identity.
double ssim_loss(const Tensor& x, const Tensor& x_hat, Tensor* grad_xh = nullptr);

// lambda * sum over scales and layers of mean|feat_real - feat_fake|.
double feature_matching_loss(const FeatureSet& real, const FeatureSet& fake, double lambda,
                             FeatureSet* grad_fake = nullptr);

// Ordered feature taps of a (pretrained) network; the identity extractor is
// the always-available test double.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual int num_taps() const = 0;
  virtual std::vector<Tensor> features(const Tensor& x, NetCache* cc) = 0;
  virtual Tensor backward(const std::vector<Tensor>& g_feats, const NetCache& cc) = 0;
};

class IdentityExtractor : public FeatureExtractor {
 public:
  int num_taps() const override { return 1; }
  std::vector<Tensor> features(const Tensor& x, NetCache* cc) override { return {x}; }
  Tensor backward(const std::vector<Tensor>& g_feats, const NetCache&) override {
    return g_feats.at(0);
  }
};

// 19-layer VGG convolutional stack with taps after the first activation of
// each of the five blocks. Weights load from the standard weights-file
// format (see README); inputs are canonical [-1,1] RGB planes.
class VggExtractor : public FeatureExtractor {
 public:
  // Random weights (tests / gradient checks).
  explicit VggExtractor(uint64_t seed);
  static VggExtractor from_weights(const std::string& path);

  int num_taps() const override { return 5; }
  std::vector<Tensor> features(const Tensor& x, NetCache* cc) override;
  Tensor backward(const std::vector<Tensor>& g_feats, const NetCache& cc) override;

  SequentialNet net;
  std::vector<int> tap_units;
};

// lambda * sum over taps of mean|V_j(x) - V_j(x_hat)|; gradient flows back
// through the extractor.
double vgg_perceptual_loss(const Tensor& x, const Tensor& x_hat, FeatureExtractor& extractor,
                           double lambda, Tensor* grad_xh = nullptr);

// -sum_d (mean log D_d(real) + mean log(1 - D_d(fake))). Scores pass through
// a sigmoid clamped to [1e-7, 1-1e-7] before the logs, so the value is
// finite and >= 0.
double discriminator_loss(const ScoreMaps& scores_real, const ScoreMaps& scores_fake,
                          ScoreMaps* grad_real = nullptr, ScoreMaps* grad_fake = nullptr);

// -sum_d mean log D_d(fake): the generator's adversarial term.
double generator_adversarial_loss(const ScoreMaps& scores_fake, ScoreMaps* grad_fake = nullptr);

// Adversarial term + L1 + SSIM, plus the two perceptual terms unless the
// schedule excluded them. Component values arrive already weighted.
double generator_loss(const ScoreMaps& scores_fake, double l1, double ssim, double dis, double vgg,
                      const LossWeights& weights);

// Fills g_total and hybrid from the component fields.
LossReport compose_report(double l1, double ssim, double dis, double vgg, double adv_g,
                          double d_loss, bool include_perceptual);

}  // namespace dsslic

#endif  // DSSLIC_LOSSES_HPP_
