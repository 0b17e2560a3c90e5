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

// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. The toy model trained here is shared by the reconstruction,
// ordering and rate-sweep criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dsslic/codec.hpp"
#include "dsslic/evaluation.hpp"
#include "dsslic/training.hpp"
#include "dsslic/weights.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dsslic;
namespace oracle = dsslic::testing;
using dsslic::testing::make_toy_items;
using dsslic::testing::synth_scene;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string failf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  return std::string(buf);
}

// Shared toy-training state (criteria 6-8).
struct ToyModel {
  NetworkBundle nets{};
  std::vector<DatasetItem> items;
  double train_seconds = 0;
  int steps = 0;
};

constexpr int kToyLabels = 8;
constexpr int kToySize = 32;
constexpr int kToySteps = 320;  // well under the 2000-step allowance

ToyModel train_toy_model() {
  ToyModel toy;
  toy.items = make_toy_items(4, kToySize, kToySize, kToyLabels, 12345);
  toy.nets = NetworkBundle::build(Variant::kWithSeg, kToyLabels, 8, 7);

  TrainingConfig cfg;
  cfg.num_labels = kToyLabels;
  cfg.batch_size = 4;
  cfg.lambda = 10.0;
  cfg.seed = 7;
  cfg.out_dir = "";

  IdentityExtractor extractor;
  Trainer trainer(cfg, &toy.nets, &extractor);
  std::vector<const DatasetItem*> batch;
  for (const auto& it : toy.items) batch.push_back(&it);

  LossWeights w;
  w.lambda = cfg.lambda;
  w.include_perceptual = true;

  auto t0 = Clock::now();
  for (int s = 0; s < kToySteps; ++s) trainer.train_step(batch, w, 2e-4);
  toy.train_seconds = seconds_since(t0);
  toy.steps = kToySteps;
  return toy;
}

// ---------------------------------------------------------------------------

std::string criterion_container_roundtrip() {
  auto t0 = Clock::now();
  Rng rng = make_rng(99, 0);
  std::uniform_int_distribution<int> dim(1, 2048), byte(0, 255), len(0, 600);
  int rejected = 0, mutations = 0;
  for (int i = 0; i < 1000; ++i) {
    LayeredBitstream b;
    b.h = static_cast<uint16_t>(dim(rng));
    b.w = static_cast<uint16_t>(dim(rng));
    b.k = rng() % 2 == 0 ? 3 : 1;
    b.num_labels = static_cast<uint8_t>(rng() % 256);
    b.alpha = static_cast<uint8_t>(1 << (rng() % 6));
    float lo = std::uniform_real_distribution<float>(-500.f, 500.f)(rng);
    float hi = std::uniform_real_distribution<float>(-500.f, 500.f)(rng);
    b.residual_min = std::min(lo, hi);
    b.residual_max = std::max(lo, hi);
    b.lossless_backend = static_cast<uint8_t>(1 + rng() % 2);
    b.lossy_backend = static_cast<uint8_t>(1 + rng() % 2);
    b.quality = static_cast<uint8_t>(rng() % 52);
    for (std::string* p : {&b.seg_payload, &b.compact_payload, &b.residual_payload}) {
      p->resize(len(rng));
      for (auto& ch : *p) ch = static_cast<char>(byte(rng));
    }

    std::string bytes = b.serialize();
    ParseResult parsed = parse_container(bytes);
    if (!(parsed.bitstream == b) || parsed.bitstream.serialize() != bytes)
      return failf("container %d not bit-exact after parse/serialize", i);

    // header corruptions: magic, version, min>max, bad lengths, truncation
    std::vector<std::string> bad;
    std::string m = bytes;
    m[i % 4] ^= 0x40;
    bad.push_back(m);
    std::string v = bytes;
    v[4] = static_cast<char>(200);
    bad.push_back(v);
    LayeredBitstream mm = b;
    mm.residual_min = mm.residual_max + 1.f;
    bad.push_back(mm.serialize());
    std::string l = bytes;
    l[23] = static_cast<char>(0xFF);
    l[24] = static_cast<char>(0xFF);
    l[25] = static_cast<char>(0xFF);
    l[26] = static_cast<char>(0x7F);
    bad.push_back(l);
    bad.push_back(bytes.substr(0, bytes.size() > 30 ? bytes.size() - 7 : 10));
    for (const std::string& bb : bad) {
      ++mutations;
      try {
        parse_container(bb);
        return failf("mutated container accepted (case %d)", mutations % 5);
      } catch (const DataError&) {
        ++rejected;
      }
    }
  }
  double dt = seconds_since(t0);
  if (dt >= 10.0) return failf("runtime %.1fs exceeds 10s", dt);
  if (rejected != mutations) return failf("only %d/%d mutations rejected", rejected, mutations);
  return "";
}

std::string criterion_minmax() {
  auto t0 = Clock::now();
  std::vector<float> r;
  for (int v = -255; v <= 255; ++v) r.push_back(static_cast<float>(v));
  MinMaxScaled mm = minmax_normalize(r, -255.f, 255.f);
  std::vector<float> back = minmax_denormalize(mm.scaled, mm.min, mm.max);
  const double bound = 510.0 / 510.0 + 1e-9;
  for (size_t i = 0; i < r.size(); ++i)
    if (std::abs(double(back[i]) - double(r[i])) > bound)
      return failf("residual %d roundtrips to %.4f (bound %.4f)", int(r[i]), back[i], bound);

  std::vector<float> constant(100, -3.5f);
  MinMaxScaled cmm = minmax_normalize(constant);
  std::vector<float> cback = minmax_denormalize(cmm.scaled, cmm.min, cmm.max);
  for (float v : cback)
    if (v != -3.5f) return failf("degenerate constant restored as %.6f", v);

  double dt = seconds_since(t0);
  if (dt >= 1.0) return failf("runtime %.2fs exceeds 1s", dt);
  return "";
}

std::string criterion_shapes() {
  Rng rng = make_rng(3, 0);
  CompNet ade(30, 8, true, rng);
  Tensor x1(3, 256, 256);
  SegmentationMap s1(256, 256, 30);
  Tensor c1 = ade.forward(x1, &s1, nullptr);
  if (c1.c != 3 || c1.h != 32 || c1.w != 32)
    return failf("256x256 -> %dx%dx%d, expected 32x32x3", c1.h, c1.w, c1.c);

  Tensor x2(3, 512, 1024);
  SegmentationMap s2(512, 1024, 30);
  Tensor c2 = ade.forward(x2, &s2, nullptr);
  if (c2.c != 3 || c2.h != 64 || c2.w != 128)
    return failf("512x1024 -> %dx%dx%d, expected 64x128x3", c2.h, c2.w, c2.c);
  return "";
}

std::string criterion_loss_identities() {
  Rng rng = make_rng(4, 0);
  Tensor x = gaussian_tensor<float>(3, 16, 16, 0.5f, rng);
  for (auto& v : x.v) v = std::clamp(v, -1.f, 1.f);

  if (l1_loss(x, x, 10.0) != 0.0) return failf("l1(x,x) = %g", l1_loss(x, x, 10.0));
  double s = ssim_loss(x, x);
  if (std::abs(s + 1.0) > 1e-6) return failf("ssim(x,x) = %.9f", s);
  FeatureSet f{{x}, {x}};
  if (feature_matching_loss(f, f, 10.0) != 0.0) return failf("fm(identical) != 0");
  ScoreMaps real{Tensor(1, 4, 4), Tensor(1, 2, 2)};
  ScoreMaps fake{Tensor(1, 4, 4), Tensor(1, 2, 2)};
  double d = discriminator_loss(real, fake);
  if (std::abs(d - 4.0 * std::log(2.0)) > 1e-6) return failf("d_loss at 0.5 = %.9f", d);
  return "";
}

std::string criterion_gradients() {
  auto t0 = Clock::now();
  Rng rng = make_rng(5, 0);
  Tensor x = gaussian_tensor<float>(3, 8, 8, 0.6f, rng);
  Tensor y = gaussian_tensor<float>(3, 8, 8, 0.6f, rng);
  for (auto& v : x.v) v = std::clamp(v, -1.f, 1.f);
  for (auto& v : y.v) v = std::clamp(v, -1.f, 1.f);
  const float h = 1e-4f;

  Tensor g;
  l1_loss(x, y, 10.0, &g);
  double e1 = oracle::max_grad_rel_err(
      y, [&](const Tensor& t) { return l1_loss(x, t, 10.0); }, g, h, 64);
  if (e1 >= 1e-3) return failf("l1 gradient rel err %.2e", e1);

  ssim_loss(x, y, &g);
  double e2 = oracle::max_grad_rel_err(
      y, [&](const Tensor& t) { return ssim_loss(x, t); }, g, h, 64);
  if (e2 >= 1e-3) return failf("ssim gradient rel err %.2e", e2);

  FeatureSet real{{x}}, fake{{y}};
  FeatureSet gf;
  feature_matching_loss(real, fake, 10.0, &gf);
  double e3 = oracle::max_grad_rel_err(
      y,
      [&](const Tensor& t) {
        FeatureSet ft{{t}};
        return feature_matching_loss(real, ft, 10.0);
      },
      gf[0][0], h, 64);
  if (e3 >= 1e-3) return failf("feature-matching gradient rel err %.2e", e3);

  ScoreMaps fake_scores{y};
  ScoreMaps gs;
  generator_adversarial_loss(fake_scores, &gs);
  double e4 = oracle::max_grad_rel_err(
      y,
      [&](const Tensor& t) {
        ScoreMaps st{t};
        return generator_adversarial_loss(st);
      },
      gs[0], h, 64);
  if (e4 >= 1e-3) return failf("adversarial gradient rel err %.2e", e4);

  ScoreMaps real_scores{x};
  ScoreMaps gr, gfk;
  discriminator_loss(real_scores, fake_scores, &gr, &gfk);
  double e5 = oracle::max_grad_rel_err(
      y,
      [&](const Tensor& t) {
        ScoreMaps st{t};
        return discriminator_loss(real_scores, st);
      },
      gfk[0], h, 64);
  if (e5 >= 1e-3) return failf("discriminator gradient rel err %.2e", e5);

  double dt = seconds_since(t0);
  if (dt >= 60.0) return failf("runtime %.1fs exceeds 60s", dt);
  return "";
}

std::string criterion_perfect_reconstruction(ToyModel& toy) {
  auto t0 = Clock::now();
  BackendRegistry registry;
  Pipeline pipe(&toy.nets, &registry);
  pipe.quality = 4;  // quantizer step 1: the residual layer is lossless

  for (int i = 0; i < 20; ++i) {
    ImageU8 img;
    SegmentationMap seg;
    synth_scene(kToySize, kToySize, kToyLabels, 5000 + i, &img, &seg);
    LayeredBitstream b = pipe.encode_with_map(img, &seg);
    DecodeResult dec = pipe.decode(b);
    if (dec.image.v != img.v) {
      int worst = 0;
      for (size_t j = 0; j < img.size(); ++j)
        worst = std::max(worst, std::abs(int(img.v[j]) - int(dec.image.v[j])));
      return failf("image %d not exact (max err %d, residual span %.0f)", i, worst,
                   b.residual_max - b.residual_min);
    }
  }
  double dt = seconds_since(t0);
  if (dt >= 300.0) return failf("runtime %.0fs exceeds 5min", dt);
  return "";
}

std::string criterion_toy_ordering(ToyModel& toy) {
  if (toy.train_seconds >= 1800.0)
    return failf("training took %.0fs, over the 30min budget", toy.train_seconds);

  // upComp view of the same trained weights: a copy with the fine generator
  // zeroed reconstructs exactly the upsampled compact image (x' = c').
  WeightsFile wf;
  wf.variant = static_cast<uint8_t>(Variant::kWithSeg);
  wf.num_labels = kToyLabels;
  wf.alpha = 8;
  toy.nets.append_blocks(&wf, /*include_discriminators=*/false);
  NetworkBundle coarse = NetworkBundle::from_file(wf);
  for (Parameter* p : coarse.finenet.net.params()) std::fill(p->w.begin(), p->w.end(), 0.f);

  BackendRegistry registry;
  Pipeline full(&toy.nets, &registry);
  full.include_residual = false;
  Pipeline upcomp(&coarse, &registry);

  double psnr_with = 0, psnr_up = 0;
  for (const auto& item : toy.items) {
    LayeredBitstream b = full.encode_with_map(item.image, &item.segmentation);
    psnr_with += psnr(item.image, full.decode(b).image);
    psnr_up += psnr(item.image, upcomp.decode(b).image);
  }
  psnr_with /= toy.items.size();
  psnr_up /= toy.items.size();
  if (!(psnr_with > psnr_up))
    return failf("PSNR(withSeg x') %.3f dB !> PSNR(upComp c') %.3f dB after %d steps", psnr_with,
                 psnr_up, toy.steps);
  std::printf("       criterion 7 detail: withSeg %.2f dB vs upComp %.2f dB (%d steps, %.0fs)\n",
              psnr_with, psnr_up, toy.steps, toy.train_seconds);
  return "";
}

std::string criterion_rd_monotonic(ToyModel& toy) {
  BackendRegistry registry;
  Pipeline pipe(&toy.nets, &registry);
  const std::vector<int> qualities = {4, 16, 22, 28, 34};
  for (int i = 0; i < 10; ++i) {
    ImageU8 img;
    SegmentationMap seg;
    synth_scene(kToySize, kToySize, kToyLabels, 7000 + i, &img, &seg);
    std::vector<std::pair<double, double>> pts;  // (bpp, psnr)
    for (int q : qualities) {
      Pipeline p = pipe;
      p.quality = q;
      LayeredBitstream b = p.encode_with_map(img, &seg);
      DecodeResult dec = p.decode(b);
      pts.emplace_back(bpp(b.total_bytes(), img.h, img.w, img.k), psnr(img, dec.image));
    }
    std::sort(pts.begin(), pts.end());
    for (size_t j = 1; j < pts.size(); ++j)
      if (pts[j].second + 1e-9 < pts[j - 1].second)
        return failf("image %d: psnr rises from %.3f to %.3f as bpp drops %.4f -> %.4f", i,
                     pts[j].second, pts[j - 1].second, pts[j].first, pts[j - 1].first);
  }
  return "";
}

std::string criterion_metric_oracles() {
  ImageU8 img;
  SegmentationMap seg;
  synth_scene(192, 256, 8, 9, &img, &seg);

  ImageU8 off = img;
  for (auto& v : off.v) v = static_cast<uint8_t>(v + 1);  // synth values stay <= 240
  double p = psnr(img, off);
  if (std::abs(p - 48.13) > 0.01) return failf("uniform-1 psnr = %.4f", p);

  double m = ms_ssim(img, img);
  if (std::abs(m - 1.0) > 1e-9) return failf("ms_ssim(x,x) = %.12f", m);

  ImageU8 a, b;
  synth_scene(48, 64, 8, 10, &a, &seg);
  synth_scene(48, 64, 8, 11, &b, &seg);
  double got = ms_ssim(a, b, 1);
  double want = oracle::ssim_u8_direct(a, b);
  if (std::abs(got - want) > 1e-6)
    return failf("single-scale ms_ssim %.9f vs ssim oracle %.9f", got, want);
  return "";
}

std::string criterion_schedules() {
  TrainingConfig cfg;
  cfg.num_labels = 8;
  if (lr_schedule(0, cfg) != 0.0002) return failf("lr(0) = %g", lr_schedule(0, cfg));
  if (std::abs(lr_schedule(125, cfg) - 0.0001) > 1e-12)
    return failf("lr(125) = %g", lr_schedule(125, cfg));
  if (!perceptual_schedule(99, cfg)) return failf("perceptual(99) = false");
  if (perceptual_schedule(100, cfg)) return failf("perceptual(100) = true");
  return "";
}

}  // namespace

int main() {
  set_num_threads(2);
  std::printf("acceptance suite\n================\n");

  ToyModel toy;
  std::printf("[....] training shared toy model (%d steps on 4 images)...\n", kToySteps);
  std::fflush(stdout);
  toy = train_toy_model();
  std::printf("[....] toy training done in %.0fs\n", toy.train_seconds);

  struct Entry {
    int id;
    const char* label;
    std::function<std::string()> run;
  };
  std::vector<Entry> entries = {
      {1, "container roundtrip and mutation rejection", criterion_container_roundtrip},
      {2, "min-max normalization exhaustive roundtrip", criterion_minmax},
      {3, "compact-representation shape contracts", criterion_shapes},
      {4, "loss identities", criterion_loss_identities},
      {5, "analytic gradients vs finite differences", criterion_gradients},
      {6, "perfect reconstruction with lossless residual",
       [&] { return criterion_perfect_reconstruction(toy); }},
      {7, "toy training ordering (withSeg > upComp)", [&] { return criterion_toy_ordering(toy); }},
      {8, "rate-distortion monotonicity over residual quality",
       [&] { return criterion_rd_monotonic(toy); }},
      {9, "metric oracles", criterion_metric_oracles},
      {10, "schedule checks", criterion_schedules},
  };

  int failures = 0;
  for (auto& e : entries) {
    std::string msg;
    try {
      msg = e.run();
    } catch (const std::exception& ex) {
      msg = std::string("exception: ") + ex.what();
    }
    if (msg.empty()) {
      std::printf("[PASS] criterion %2d: %s\n", e.id, e.label);
    } else {
      std::printf("[FAIL] criterion %2d: %s — %s\n", e.id, e.label, msg.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  std::printf("================\n%d/%zu criteria passed\n", int(entries.size()) - failures,
              entries.size());
  return failures == 0 ? 0 : 1;
}
