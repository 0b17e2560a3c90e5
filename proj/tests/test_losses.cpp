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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsslic/losses.hpp"
#include "oracles.hpp"

using namespace dsslic;
namespace oracle = dsslic::testing;

namespace {

Tensor random_unit(int c, int h, int w, uint64_t seed, float scale = 0.8f) {
  Rng rng = make_rng(seed, 0);
  Tensor t = gaussian_tensor<float>(c, h, w, scale, rng);
  for (auto& v : t.v) v = std::clamp(v, -1.f, 1.f);
  return t;
}

}  // namespace

TEST_CASE("l1 loss") {
  Tensor x = random_unit(3, 8, 8, 1);

  SUBCASE("identity gives zero") { CHECK(l1_loss(x, x, 10.0) == 0.0); }
  SUBCASE("uniform half-unit difference at lambda 10 gives 10") {
    Tensor a(3, 4, 4), b(3, 4, 4);
    a.fill(0.25f);
    b.fill(-0.25f);
    CHECK(l1_loss(a, b, 10.0) == doctest::Approx(10.0).epsilon(1e-9));
  }
  SUBCASE("matches the elementwise oracle") {
    Tensor y = random_unit(3, 8, 8, 2);
    CHECK(l1_loss(x, y, 10.0) == doctest::Approx(oracle::l1_direct(x, y, 10.0)).epsilon(1e-6));
  }
  SUBCASE("shape mismatch throws") {
    Tensor y(3, 8, 9);
    CHECK_THROWS_AS(l1_loss(x, y, 10.0), DataError);
  }
}

TEST_CASE("ssim components") {
  Tensor x = random_unit(3, 12, 12, 3);

  SUBCASE("identity gives (1,1,1)") {
    SsimComponents c = ssim_components(x, x);
    CHECK(c.luminance == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.contrast == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.structure == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("two constants: contrast and structure degenerate to one") {
    Tensor a(1, 6, 6), b(1, 6, 6);
    a.fill(0.2f);
    b.fill(-0.4f);
    SsimComponents c = ssim_components(a, b);
    CHECK(c.contrast == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.structure == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.luminance < 1.0);
  }
}

TEST_CASE("ssim loss") {
  Tensor x = random_unit(3, 16, 16, 4);

  SUBCASE("identity gives -1") {
    CHECK(ssim_loss(x, x) == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("negated image is imperfect") { CHECK(ssim_loss(x, [&] {
                                            Tensor y = x;
                                            y.scale_(-1.f);
                                            return y;
                                          }()) > -1.0); }
  SUBCASE("matches the per-window oracle") {
    Tensor y = random_unit(3, 16, 16, 5);
    double got = ssim_loss(x, y);
    double want = -oracle::ssim_windowed_direct(x, y, 11, 1.5);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
  SUBCASE("small inputs shrink the window") {
    Tensor a = random_unit(3, 8, 8, 6), b = random_unit(3, 8, 8, 7);
    double got = ssim_loss(a, b);
    double want = -oracle::ssim_windowed_direct(a, b, 7, 1.5);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
    CHECK(got >= -1.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("feature matching loss") {
  auto feats = [](uint64_t seed, float scale) {
    FeatureSet fs;
    for (int d = 0; d < 2; ++d) {
      std::vector<Tensor> layers;
      for (int i = 0; i < 4; ++i) {
        Rng rng = make_rng(seed + d * 10 + i, 1);
        layers.push_back(gaussian_tensor<float>(4, 6 - i, 6 - i, scale, rng));
      }
      fs.push_back(std::move(layers));
    }
    return fs;
  };

  SUBCASE("identical features give zero") {
    FeatureSet f = feats(1, 0.5f);
    CHECK(feature_matching_loss(f, f, 10.0) == 0.0);
  }
  SUBCASE("single all-ones vs all-zeros layer at lambda 10 gives 10") {
    FeatureSet r{{Tensor(2, 3, 3)}}, f{{Tensor(2, 3, 3)}};
    r[0][0].fill(1.f);
    CHECK(feature_matching_loss(r, f, 10.0) == doctest::Approx(10.0).epsilon(1e-9));
  }
  SUBCASE("matches the double-sum oracle") {
    FeatureSet r = feats(2, 0.7f), f = feats(3, 0.7f);
    CHECK(feature_matching_loss(r, f, 10.0) ==
          doctest::Approx(oracle::feature_matching_direct(r, f, 10.0)).epsilon(1e-6));
  }
  SUBCASE("structure mismatch throws") {
    FeatureSet r = feats(4, 0.5f), f = feats(5, 0.5f);
    f[1].pop_back();
    CHECK_THROWS_AS(feature_matching_loss(r, f, 10.0), DataError);
  }
}

TEST_CASE("perceptual loss under the identity extractor reduces to a scaled L1") {
  IdentityExtractor id;
  Tensor x = random_unit(3, 8, 8, 8), y = random_unit(3, 8, 8, 9);
  CHECK(vgg_perceptual_loss(x, x, id, 10.0) == 0.0);
  double got = vgg_perceptual_loss(x, y, id, 10.0);
  // identity extractor: lambda * mean|x-y| = l1_direct / 2
  CHECK(got == doctest::Approx(oracle::l1_direct(x, y, 10.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("discriminator and generator adversarial losses") {
  SUBCASE("scores at zero give 4 ln 2 for D and 2 ln 2 for G") {
    ScoreMaps real{Tensor(1, 4, 4), Tensor(1, 2, 2)};
    ScoreMaps fake{Tensor(1, 4, 4), Tensor(1, 2, 2)};
    CHECK(discriminator_loss(real, fake) ==
          doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-9));
    CHECK(generator_adversarial_loss(fake) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
  }
  SUBCASE("perfect discriminator drives the loss to (clamped) zero") {
    ScoreMaps real{Tensor(1, 2, 2)}, fake{Tensor(1, 2, 2)};
    real[0].fill(40.f);
    fake[0].fill(-40.f);
    double loss = discriminator_loss(real, fake);
    CHECK(loss >= 0.0);
    CHECK(loss < 1e-5);
  }
  SUBCASE("matches the direct oracle on random maps") {
    Rng rng = make_rng(21, 0);
    ScoreMaps real{gaussian_tensor<float>(1, 5, 7, 2.f, rng),
                   gaussian_tensor<float>(1, 3, 4, 2.f, rng)};
    ScoreMaps fake{gaussian_tensor<float>(1, 5, 7, 2.f, rng),
                   gaussian_tensor<float>(1, 3, 4, 2.f, rng)};
    CHECK(discriminator_loss(real, fake) ==
          doctest::Approx(oracle::discriminator_loss_direct(real, fake)).epsilon(1e-9));
  }
  SUBCASE("loss stays non-negative on random maps") {
    for (uint64_t s = 0; s < 20; ++s) {
      Rng rng = make_rng(s, 5);
      ScoreMaps real{gaussian_tensor<float>(1, 4, 4, 3.f, rng)};
      ScoreMaps fake{gaussian_tensor<float>(1, 4, 4, 3.f, rng)};
      CHECK(discriminator_loss(real, fake) >= 0.0);
    }
  }
}

TEST_CASE("generator loss composition and the perceptual dropout hook") {
  ScoreMaps fake{Tensor(1, 4, 4), Tensor(1, 2, 2)};  // zeros: adv = 2 ln 2
  LossWeights on;
  on.include_perceptual = true;
  LossWeights off;
  off.include_perceptual = false;

  double with = generator_loss(fake, 1.5, -0.5, 0.7, 0.3, on);
  double without = generator_loss(fake, 1.5, -0.5, 0.7, 0.3, off);
  CHECK(with - without == doctest::Approx(0.7 + 0.3).epsilon(1e-12));
  CHECK(without == doctest::Approx(2 * std::log(2.0) + 1.5 - 0.5).epsilon(1e-9));

  SUBCASE("all components zero at scores 0.5 gives 2 ln 2") {
    CHECK(generator_loss(fake, 0, 0, 0, 0, on) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-9));
  }
  SUBCASE("report composition matches the sum of its parts") {
    LossReport r = compose_report(1.5, -0.5, 0.7, 0.3, 2 * std::log(2.0), 1.1, true);
    CHECK(r.g_total == doctest::Approx(2 * std::log(2.0) + 1.5 - 0.5 + 0.7 + 0.3));
    CHECK(r.hybrid == doctest::Approx(r.d_loss + r.g_total));
    LossReport r2 = compose_report(1.5, -0.5, 0.7, 0.3, 2 * std::log(2.0), 1.1, false);
    CHECK(r.g_total - r2.g_total == doctest::Approx(0.7 + 0.3));
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Tensor x = random_unit(3, 8, 8, 31, 0.6f);
  Tensor y = random_unit(3, 8, 8, 32, 0.6f);
  const float h = 1e-4f;
  const int samples = 48;

  SUBCASE("l1") {
    Tensor g;
    l1_loss(x, y, 10.0, &g);
    double err = oracle::max_grad_rel_err(
        y, [&](const Tensor& t) { return l1_loss(x, t, 10.0); }, g, h, samples);
    CHECK(err < 1e-3);
  }
  SUBCASE("ssim") {
    Tensor g;
    ssim_loss(x, y, &g);
    double err = oracle::max_grad_rel_err(
        y, [&](const Tensor& t) { return ssim_loss(x, t); }, g, h, samples);
    CHECK(err < 1e-3);
  }
  SUBCASE("feature matching") {
    FeatureSet real{{x}}, fake{{y}};
    FeatureSet gf;
    feature_matching_loss(real, fake, 10.0, &gf);
    double err = oracle::max_grad_rel_err(
        y,
        [&](const Tensor& t) {
          FeatureSet f{{t}};
          return feature_matching_loss(real, f, 10.0);
        },
        gf[0][0], h, samples);
    CHECK(err < 1e-3);
  }
  SUBCASE("generator adversarial") {
    ScoreMaps fake{y};
    ScoreMaps gf;
    generator_adversarial_loss(fake, &gf);
    double err = oracle::max_grad_rel_err(
        y,
        [&](const Tensor& t) {
          ScoreMaps f{t};
          return generator_adversarial_loss(f);
        },
        gf[0], h, samples);
    CHECK(err < 1e-3);
  }
  SUBCASE("discriminator, both sides") {
    ScoreMaps real{x}, fake{y};
    ScoreMaps gr, gf;
    discriminator_loss(real, fake, &gr, &gf);
    double err_f = oracle::max_grad_rel_err(
        y,
        [&](const Tensor& t) {
          ScoreMaps f{t};
          return discriminator_loss(real, f);
        },
        gf[0], h, samples);
    double err_r = oracle::max_grad_rel_err(
        x,
        [&](const Tensor& t) {
          ScoreMaps r{t};
          return discriminator_loss(r, fake);
        },
        gr[0], h, samples);
    CHECK(err_f < 1e-3);
    CHECK(err_r < 1e-3);
  }
  SUBCASE("perceptual through a random tap network") {
    VggExtractor vgg(77);
    Tensor g;
    Tensor xs = random_unit(3, 32, 32, 33, 0.5f);
    Tensor ys = random_unit(3, 32, 32, 34, 0.5f);
    vgg_perceptual_loss(xs, ys, vgg, 10.0, &g);
    // float network forward: a directional probe averages out the kinks
    double err = oracle::directional_grad_rel_err(
        ys, [&](const Tensor& t) { return vgg_perceptual_loss(xs, t, vgg, 10.0); }, g, 1e-2f, 91);
    CHECK(err < 2e-2);
  }
}
