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

#include "dsslic/training.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dsslic/codec.hpp"
#include "dsslic/weights.hpp"

namespace dsslic {

TrainingConfig TrainingConfig::from_config(const Config& c) {
  TrainingConfig t;
  t.epochs_total = c.get_int("epochs_total", t.epochs_total);
  t.epochs_lr_fixed = c.get_int("epochs_lr_fixed", t.epochs_lr_fixed);
  t.epochs_no_perceptual_tail = c.get_int("epochs_no_perceptual_tail", t.epochs_no_perceptual_tail);
  t.learning_rate = c.get_double("learning_rate", t.learning_rate);
  t.batch_size = c.get_int("batch_size", t.batch_size);
  t.alpha = c.get_int("alpha", t.alpha);
  t.lambda = c.get_double("lambda", t.lambda);
  t.dataset_root = c.require("dataset_root");
  t.resize_rule = parse_resize_rule(c.get("resize_rule", "none"));
  t.num_labels = c.get_int("num_labels", 0);
  t.seed = static_cast<uint64_t>(c.get_int("seed", 0));
  t.variant = parse_variant(c.get("variant", "withSeg"));
  t.out_dir = c.get("out_dir", "out");
  t.resume = c.get("resume", "");
  t.extractor = c.get("extractor", "identity");
  t.vgg_weights = c.get("vgg_weights", "");
  t.checkpoint_every = c.get_int("checkpoint_every", 1);
  t.check();
  return t;
}

void TrainingConfig::check() const {
  if (num_labels < 1 || num_labels > 255)
    throw DataError("config: num_labels must be in 1..255");
  if (batch_size < 1) throw DataError("config: batch_size must be >= 1");
  if (lambda <= 0) throw DataError("config: lambda must be positive");
  if (epochs_lr_fixed > epochs_total)
    throw DataError("config: epochs_lr_fixed exceeds epochs_total");
  if (epochs_no_perceptual_tail > epochs_total)
    throw DataError("config: epochs_no_perceptual_tail exceeds epochs_total");
  if (extractor != "identity" && extractor != "vgg")
    throw DataError("config: extractor must be identity or vgg");
}

double lr_schedule(int epoch, const TrainingConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs_total)
    throw DataError("lr_schedule: epoch " + std::to_string(epoch) + " out of range");
  if (epoch < cfg.epochs_lr_fixed) return cfg.learning_rate;
  int span = cfg.epochs_total - cfg.epochs_lr_fixed;
  return cfg.learning_rate * static_cast<double>(cfg.epochs_total - epoch) / span;
}

bool perceptual_schedule(int epoch, const TrainingConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs_total)
    throw DataError("perceptual_schedule: epoch " + std::to_string(epoch) + " out of range");
  return epoch < cfg.epochs_total - cfg.epochs_no_perceptual_tail;
}

void check_trainable(const std::vector<DatasetItem>& items, const TrainingConfig& cfg) {
  for (const auto& it : items) {
    if (it.image.h % cfg.alpha != 0 || it.image.w % cfg.alpha != 0)
      throw DataError("training image '" + it.id + "' dims not divisible by alpha");
    if (std::min(it.image.h, it.image.w) < 32)
      throw DataError("training image '" + it.id + "' smaller than the 32px discriminator minimum");
    if (it.segmentation.h != it.image.h || it.segmentation.w != it.image.w)
      throw DataError("training item '" + it.id + "' has mismatched segmentation dims");
  }
}

namespace {

SegmentationMap seg_half(const SegmentationMap& s) {
  SegmentationMap out(s.h / 2, s.w / 2, s.num_labels);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) out.at(y, x) = s.at(2 * y, 2 * x);
  return out;
}

// One sample's generator forward state.
struct SampleState {
  Tensor x;                  // canonical plane
  const SegmentationMap* seg = nullptr;
  SegmentationMap seg_ds;
  Tensor c, c_up, x_hat;
  Tensor x_ds, c_up_ds, x_hat_ds;  // 2x-downsampled views for the scale-2 discriminator
  NetCache cc_comp, cc_fine;
};

void scale_grads(const std::vector<Parameter*>& params, float s) {
  for (Parameter* p : params)
    for (auto& g : p->g) g *= s;
}

}  // namespace

Trainer::Trainer(const TrainingConfig& cfg, NetworkBundle* nets, FeatureExtractor* extractor)
    : cfg_(cfg), nets_(nets), extractor_(extractor) {
  if (nets_->variant != cfg.variant)
    throw DataError("trainer: weights variant disagrees with config variant");
}

LossReport Trainer::train_step(const std::vector<const DatasetItem*>& batch,
                               const LossWeights& weights, double lr) {
  if (batch.empty()) throw DataError("train_step: empty batch");
  NetworkBundle& nets = *nets_;
  const bool use_seg = variant_uses_seg(nets.variant);
  const bool use_fine = variant_uses_finenet(nets.variant);
  const float inv_b = 1.f / static_cast<float>(batch.size());

  auto forward_sample = [&](const DatasetItem& item, bool caches) {
    SampleState st;
    st.x = to_plane(item.image).data;
    st.seg = use_seg ? &item.segmentation : nullptr;
    if (use_seg) st.seg_ds = seg_half(item.segmentation);
    st.c = nets.compnet.forward(st.x, st.seg, caches ? &st.cc_comp : nullptr);
    st.c_up = upsample_compact(st.c, nets.alpha);
    if (use_fine) {
      Tensor f = nets.finenet.forward(st.seg, st.c_up, caches ? &st.cc_fine : nullptr);
      st.x_hat = st.c_up;
      st.x_hat.add_(f);
    } else {
      st.x_hat = st.c_up;
    }
    st.x_ds = ops::avgpool2_fwd(st.x);
    st.c_up_ds = ops::avgpool2_fwd(st.c_up);
    st.x_hat_ds = ops::avgpool2_fwd(st.x_hat);
    return st;
  };

  // --- discriminator update ---------------------------------------------
  auto d_params = nets.discriminator_params();
  for (Parameter* p : d_params) p->zero_grad();
  double d_loss_sum = 0;
  for (const DatasetItem* item : batch) {
    SampleState st = forward_sample(*item, /*caches=*/false);
    const SegmentationMap* seg1 = st.seg;
    const SegmentationMap* seg2 = use_seg ? &st.seg_ds : nullptr;
    NetCache cr1, cf1, cr2, cf2;
    DiscOutput or1 = nets.d1.forward(seg1, st.c_up, st.x, &cr1);
    DiscOutput of1 = nets.d1.forward(seg1, st.c_up, st.x_hat, &cf1);
    DiscOutput or2 = nets.d2.forward(seg2, st.c_up_ds, st.x_ds, &cr2);
    DiscOutput of2 = nets.d2.forward(seg2, st.c_up_ds, st.x_hat_ds, &cf2);
    ScoreMaps g_real, g_fake;
    d_loss_sum += discriminator_loss({or1.score, or2.score}, {of1.score, of2.score}, &g_real,
                                     &g_fake);
    nets.d1.backward(g_real[0], {}, cr1);
    nets.d1.backward(g_fake[0], {}, cf1);
    nets.d2.backward(g_real[1], {}, cr2);
    nets.d2.backward(g_fake[1], {}, cf2);
  }
  scale_grads(d_params, inv_b);
  adam_d_.step(d_params, lr);

  // --- generator update ---------------------------------------------------
  auto g_params = nets.generator_params();
  for (Parameter* p : nets.all_params()) p->zero_grad();
  double l1_sum = 0, ssim_sum = 0, dis_sum = 0, vgg_sum = 0, adv_sum = 0;
  for (const DatasetItem* item : batch) {
    SampleState st = forward_sample(*item, /*caches=*/true);
    const SegmentationMap* seg1 = st.seg;
    const SegmentationMap* seg2 = use_seg ? &st.seg_ds : nullptr;

    NetCache cf1, cf2;
    DiscOutput or1 = nets.d1.forward(seg1, st.c_up, st.x, nullptr);
    DiscOutput of1 = nets.d1.forward(seg1, st.c_up, st.x_hat, &cf1);
    DiscOutput or2 = nets.d2.forward(seg2, st.c_up_ds, st.x_ds, nullptr);
    DiscOutput of2 = nets.d2.forward(seg2, st.c_up_ds, st.x_hat_ds, &cf2);

    Tensor g_l1, g_ssim, g_vgg;
    l1_sum += l1_loss(st.x, st.x_hat, cfg_.lambda, &g_l1);
    ssim_sum += ssim_loss(st.x, st.x_hat, &g_ssim);
    ScoreMaps g_scores;
    adv_sum += generator_adversarial_loss({of1.score, of2.score}, &g_scores);
    FeatureSet g_feats;
    if (weights.include_perceptual) {
      dis_sum += feature_matching_loss({or1.features, or2.features}, {of1.features, of2.features},
                                       cfg_.lambda, &g_feats);
      vgg_sum += vgg_perceptual_loss(st.x, st.x_hat, *extractor_, cfg_.lambda, &g_vgg);
    }

    Tensor g_xhat = g_l1;
    g_xhat.add_(g_ssim);
    if (!g_vgg.empty()) g_xhat.add_(g_vgg);

    Tensor g_cup(st.c_up.c, st.c_up.h, st.c_up.w);
    DiscGrad dg1 = nets.d1.backward(g_scores[0], weights.include_perceptual ? g_feats[0]
                                                                            : std::vector<Tensor>{},
                                    cf1);
    g_xhat.add_(dg1.g_image);
    g_cup.add_(dg1.g_cprime);
    DiscGrad dg2 = nets.d2.backward(g_scores[1], weights.include_perceptual ? g_feats[1]
                                                                            : std::vector<Tensor>{},
                                    cf2);
    g_xhat.add_(ops::avgpool2_bwd(dg2.g_image, st.x.h, st.x.w));
    g_cup.add_(ops::avgpool2_bwd(dg2.g_cprime, st.x.h, st.x.w));

    // x_hat = c_up + f: the reconstruction gradient reaches both addends,
    // and FineNet passes its share back to its c' input slice.
    g_cup.add_(g_xhat);
    if (use_fine) {
      Tensor g_from_fine = nets.finenet.backward(g_xhat, st.cc_fine);
      g_cup.add_(g_from_fine);
    }
    Tensor g_c = ops::upsample_bilinear_bwd(g_cup, nets.alpha, st.c.h, st.c.w);
    nets.compnet.backward(g_c, st.cc_comp);
  }
  scale_grads(g_params, inv_b);
  adam_g_.step(g_params, lr);

  const double b = static_cast<double>(batch.size());
  LossReport r = compose_report(l1_sum / b, ssim_sum / b, dis_sum / b, vgg_sum / b, adv_sum / b,
                                d_loss_sum / b, weights.include_perceptual);
  for (double v : {r.l1, r.ssim, r.dis, r.vgg, r.adv_g, r.d_loss}) {
    if (!std::isfinite(v)) {
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "train_step: non-finite loss (l1=%g ssim=%g dis=%g vgg=%g adv_g=%g d=%g)",
                    r.l1, r.ssim, r.dis, r.vgg, r.adv_g, r.d_loss);
      throw DataError(buf);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Checkpoints

void Trainer::save_checkpoint(const std::string& path, int next_epoch) const {
  WeightsFile wf;
  wf.variant = static_cast<uint8_t>(nets_->variant);
  wf.num_labels = static_cast<uint8_t>(nets_->num_labels);
  wf.alpha = static_cast<uint8_t>(nets_->alpha);
  nets_->append_blocks(&wf, /*include_discriminators=*/true);
  for (Parameter* p : nets_->all_params()) {
    if (p->m.empty()) continue;
    wf.blocks.push_back({"opt/m/" + p->name, p->shape, p->m});
    wf.blocks.push_back({"opt/v/" + p->name, p->shape, p->v});
  }
  wf.add_meta("epoch_next", next_epoch);
  wf.add_meta("adam_g_t", adam_g_.t);
  wf.add_meta("adam_d_t", adam_d_.t);
  wf.save(path);
}

int Trainer::load_checkpoint(const std::string& path) {
  WeightsFile wf = WeightsFile::load(path);
  if (wf.variant != static_cast<uint8_t>(nets_->variant) || wf.num_labels != nets_->num_labels ||
      wf.alpha != nets_->alpha)
    throw DataError("checkpoint metadata disagrees with training config: " + path);
  for (Parameter* p : nets_->all_params()) {
    const WeightsBlock* b = wf.find_block(p->name);
    if (b == nullptr) throw DataError("checkpoint missing block: " + p->name);
    if (b->shape != p->shape) throw DataError("checkpoint shape mismatch: " + p->name);
    p->w = b->data;
    if (const WeightsBlock* m = wf.find_block("opt/m/" + p->name)) p->m = m->data;
    if (const WeightsBlock* v = wf.find_block("opt/v/" + p->name)) p->v = v->data;
  }
  const int64_t* gt = wf.find_meta("adam_g_t");
  const int64_t* dt = wf.find_meta("adam_d_t");
  const int64_t* ep = wf.find_meta("epoch_next");
  if (gt == nullptr || dt == nullptr || ep == nullptr)
    throw DataError("checkpoint missing bookkeeping metadata: " + path);
  adam_g_.t = *gt;
  adam_d_.t = *dt;
  return static_cast<int>(*ep);
}

// ---------------------------------------------------------------------------
// Full schedule

TrainResult Trainer::train(const std::vector<DatasetItem>& items) {
  if (items.empty()) throw DataError("train: no items");
  check_trainable(items, cfg_);
  namespace fs = std::filesystem;
  fs::create_directories(cfg_.out_dir);

  int start_epoch = 0;
  if (!cfg_.resume.empty()) start_epoch = load_checkpoint(cfg_.resume);

  const std::string csv_path = cfg_.out_dir + "/loss_history.csv";
  std::ofstream csv;
  if (start_epoch == 0) {
    csv.open(csv_path, std::ios::trunc);
    csv << "epoch,step,l1,ssim,dis,vgg,adv_g,d_loss\n";
  } else {
    csv.open(csv_path, std::ios::app);
  }
  if (!csv) throw DataError("cannot open loss history: " + csv_path);

  const bool perceptual_always = variant_perceptual_all_epochs(cfg_.variant);
  TrainResult result;
  for (int epoch = start_epoch; epoch < cfg_.epochs_total; ++epoch) {
    const double lr = lr_schedule(epoch, cfg_);
    LossWeights w;
    w.lambda = cfg_.lambda;
    w.include_perceptual = perceptual_always || perceptual_schedule(epoch, cfg_);

    // Epoch-keyed shuffle: resuming at an epoch boundary reproduces the run.
    std::vector<size_t> order(items.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng = make_rng(cfg_.seed, 1000 + static_cast<uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    int step = 0;
    for (size_t i = 0; i < order.size(); i += cfg_.batch_size, ++step) {
      std::vector<const DatasetItem*> batch;
      for (size_t j = i; j < std::min(order.size(), i + cfg_.batch_size); ++j)
        batch.push_back(&items[order[j]]);
      LossReport r = train_step(batch, w, lr);
      result.history.push_back(r);
      char row[256];
      std::snprintf(row, sizeof(row), "%d,%d,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g\n", epoch, step, r.l1,
                    r.ssim, r.dis, r.vgg, r.adv_g, r.d_loss);
      csv << row;
    }
    csv.flush();

    if (cfg_.checkpoint_every > 0 && ((epoch + 1) % cfg_.checkpoint_every == 0)) {
      char name[64];
      std::snprintf(name, sizeof(name), "/checkpoint_epoch_%03d.dslw", epoch);
      save_checkpoint(cfg_.out_dir + name, epoch + 1);
    }
    result.epochs_run = epoch + 1 - start_epoch;
  }

  result.weights_path = cfg_.out_dir + "/weights.dslw";
  nets_->save(result.weights_path);
  return result;
}

}  // namespace dsslic
