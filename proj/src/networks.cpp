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

#include "dsslic/networks.hpp"

#include <filesystem>

#include "dsslic/weights.hpp"

namespace dsslic {

bool variant_uses_seg(Variant v) { return v != Variant::kNoSeg; }
bool variant_uses_finenet(Variant v) { return v != Variant::kUpComp; }
bool variant_perceptual_all_epochs(Variant v) { return v == Variant::kSynth; }

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kUpComp: return "upComp";
    case Variant::kNoSeg: return "noSeg";
    case Variant::kWithSeg: return "withSeg";
    case Variant::kSynth: return "synth";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kUpComp, Variant::kNoSeg, Variant::kWithSeg, Variant::kSynth})
    if (variant_name(v) == name) return v;
  throw UsageError("unknown variant: " + name + " (expected upComp|noSeg|withSeg|synth)");
}

// ---------------------------------------------------------------------------
// Specs

namespace {

bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

int log2i(int n) {
  int k = 0;
  while ((1 << k) < n) ++k;
  return k;
}

}  // namespace

NetworkSpec compnet_spec(int in_channels, int alpha) {
  if (!is_pow2(alpha)) throw DataError("alpha must be a power of two, got " + std::to_string(alpha));
  NetworkSpec s;
  s.in_channels = in_channels;
  s.out_channels = 3;
  s.layers.push_back({LayerKind::kConv7, 64, 7, 1, true, Act::kRelu});
  for (int i = 1; i <= log2i(alpha); ++i) {
    int filters = std::min(64 << i, 512);
    s.layers.push_back({LayerKind::kDown, filters, 3, 2, true, Act::kRelu});
  }
  s.layers.push_back({LayerKind::kConv7, 3, 7, 1, false, Act::kTanh});
  return s;
}

NetworkSpec finenet_spec(int in_channels) {
  NetworkSpec s;
  s.in_channels = in_channels;
  s.out_channels = 3;
  s.layers.push_back({LayerKind::kConv7, 64, 7, 1, true, Act::kRelu});
  for (int filters : {128, 256, 512})
    s.layers.push_back({LayerKind::kDown, filters, 3, 2, true, Act::kRelu});
  for (int i = 0; i < 9; ++i) s.layers.push_back({LayerKind::kResidual, 512, 3, 1, true, Act::kRelu});
  for (int filters : {256, 128, 64})
    s.layers.push_back({LayerKind::kUp, filters, 3, 2, true, Act::kRelu});
  s.layers.push_back({LayerKind::kConv7, 3, 7, 1, false, Act::kTanh});
  return s;
}

NetworkSpec discriminator_spec(int in_channels) {
  NetworkSpec s;
  s.in_channels = in_channels;
  s.out_channels = 1;
  for (int filters : {64, 128, 256, 512})
    s.layers.push_back({LayerKind::kDiscConv, filters, 4, 2, true, Act::kLRelu});
  s.layers.push_back({LayerKind::kScoreConv, 1, 3, 1, false, Act::kNone});
  return s;
}

namespace {

std::string kind_tag(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::kConv7: return "c";
    case LayerKind::kDown: return "d";
    case LayerKind::kResidual: return "r";
    case LayerKind::kUp: return "u";
    case LayerKind::kDiscConv: return "C";
    case LayerKind::kScoreConv: return "s";
  }
  return "?";
}

}  // namespace

SequentialNet build_from_spec(const NetworkSpec& spec, const std::string& prefix, Rng& rng) {
  SequentialNet net;
  int cin = spec.in_channels;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    std::unique_ptr<Unit> u;
    switch (l.kind) {
      case LayerKind::kConv7:
        u = std::make_unique<ConvUnit>(cin, l.filters, l.kernel, 1, l.kernel / 2, PadMode::kZero,
                                       false, l.norm, l.act, rng);
        break;
      case LayerKind::kDown:
        u = std::make_unique<ConvUnit>(cin, l.filters, 3, 2, 1, PadMode::kZero, false, l.norm,
                                       l.act, rng);
        break;
      case LayerKind::kResidual:
        u = std::make_unique<ResidualUnit>(cin, rng);
        break;
      case LayerKind::kUp:
        u = std::make_unique<ConvUnit>(cin, l.filters, 3, 2, 1, PadMode::kZero, true, l.norm,
                                       l.act, rng);
        break;
      case LayerKind::kDiscConv:
        u = std::make_unique<ConvUnit>(cin, l.filters, 4, 2, 1, PadMode::kZero, false, l.norm,
                                       l.act, rng);
        break;
      case LayerKind::kScoreConv:
        u = std::make_unique<ConvUnit>(cin, 1, 3, 1, 1, PadMode::kZero, false, false, Act::kNone,
                                       rng);
        break;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%02zu_%s%d", i, kind_tag(l).c_str(), l.filters);
    u->name = name;
    net.units.push_back(std::move(u));
    cin = l.filters;
  }
  net.assign_names(prefix);
  return net;
}

// ---------------------------------------------------------------------------
// Generators

CompNet::CompNet(int num_labels_, int alpha_, bool use_seg_, Rng& rng)
    : num_labels(num_labels_), alpha(alpha_), use_seg(use_seg_) {
  net = build_from_spec(compnet_spec(3 + (use_seg ? num_labels : 0), alpha), "compnet", rng);
}

Tensor CompNet::forward(const Tensor& x, const SegmentationMap* seg, NetCache* cc) {
  if (x.h % alpha != 0 || x.w % alpha != 0)
    throw DataError("CompNet input dims must be divisible by alpha=" + std::to_string(alpha));
  if (!use_seg) return net.forward(x, cc);
  if (seg == nullptr) throw DataError("CompNet built with segmentation inputs but none given");
  if (seg->h != x.h || seg->w != x.w)
    throw DataError("CompNet: image and segmentation dims disagree");
  Tensor onehot = encode_segmentation_input(*seg);
  Tensor in = concat_channels<float>({&x, &onehot});
  return net.forward(in, cc);
}

Tensor CompNet::backward(const Tensor& g_compact, const NetCache& cc) {
  Tensor g_in = net.backward(g_compact, cc);
  return use_seg ? slice_channels(g_in, 0, 3) : g_in;
}

FineNet::FineNet(int num_labels_, bool use_seg_, Rng& rng)
    : num_labels(num_labels_), use_seg(use_seg_) {
  net = build_from_spec(finenet_spec((use_seg ? num_labels : 0) + 3), "finenet", rng);
}

Tensor FineNet::forward(const SegmentationMap* seg, const Tensor& c_up, NetCache* cc) {
  if (c_up.h % 8 != 0 || c_up.w % 8 != 0)
    throw DataError("FineNet input dims must be divisible by 8");
  if (!use_seg) return net.forward(c_up, cc);
  if (seg == nullptr) throw DataError("FineNet built with segmentation inputs but none given");
  if (seg->h != c_up.h || seg->w != c_up.w)
    throw DataError("FineNet: segmentation and compact-image dims disagree");
  Tensor onehot = encode_segmentation_input(*seg);
  Tensor in = concat_channels<float>({&onehot, &c_up});
  return net.forward(in, cc);
}

Tensor FineNet::backward(const Tensor& g_f, const NetCache& cc) {
  Tensor g_in = net.backward(g_f, cc);
  return use_seg ? slice_channels(g_in, num_labels, 3) : g_in;
}

// ---------------------------------------------------------------------------
// Discriminators

Discriminator::Discriminator(int num_labels_, bool use_seg_, int scale_, Rng& rng)
    : num_labels(num_labels_), scale(scale_), use_seg(use_seg_) {
  net = build_from_spec(discriminator_spec((use_seg ? num_labels : 0) + 6),
                        scale_ == 1 ? "disc1" : "disc2", rng);
}

DiscOutput Discriminator::forward(const SegmentationMap* seg, const Tensor& c_up,
                                  const Tensor& image, NetCache* cc) {
  std::vector<const Tensor*> parts;
  Tensor onehot;
  if (use_seg) {
    if (seg == nullptr) throw DataError("discriminator built with segmentation inputs");
    onehot = encode_segmentation_input(*seg);
    parts.push_back(&onehot);
  }
  parts.push_back(&c_up);
  parts.push_back(&image);
  Tensor in = concat_channels<float>(parts);
  DiscOutput out;
  out.score = net.forward_tapped(in, kFeatureLayers, &out.features, cc);
  return out;
}

DiscGrad Discriminator::backward(const Tensor& g_score, const std::vector<Tensor>& g_features,
                                 const NetCache& cc) {
  Tensor g_in = net.backward_tapped(g_score, g_features.empty() ? nullptr : &g_features, cc);
  DiscGrad g;
  int off = use_seg ? num_labels : 0;
  g.g_cprime = slice_channels(g_in, off, 3);
  g.g_image = slice_channels(g_in, off + 3, 3);
  return g;
}

// ---------------------------------------------------------------------------
// Segmentation handling

Tensor encode_segmentation_input(const SegmentationMap& s) {
  Tensor out(s.num_labels, s.h, s.w);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) {
      int32_t l = s.at(y, x);
      if (l < 0 || l >= s.num_labels)
        throw DataError("segmentation label " + std::to_string(l) + " out of range [0," +
                        std::to_string(s.num_labels) + ")");
      out.at(l, y, x) = 1.f;
    }
  return out;
}

SegnetAdapter SegnetAdapter::from_directory(const std::string& dir, int num_labels) {
  SegnetAdapter a;
  a.dir_ = dir;
  a.num_labels_ = num_labels;
  return a;
}

SegnetAdapter SegnetAdapter::from_model(ModelFn fn, int num_labels) {
  SegnetAdapter a;
  a.model_ = std::move(fn);
  a.num_labels_ = num_labels;
  return a;
}

SegmentationMap SegnetAdapter::segment(const ImagePlane& x, const std::string& id) const {
  if (!dir_.empty()) {
    std::filesystem::path p = std::filesystem::path(dir_) / (id + ".png");
    if (!std::filesystem::exists(p))
      throw DataError("no precomputed segmentation map for '" + id + "' in " + dir_);
    SegmentationMap s = load_label_map(p.string(), num_labels_);
    if (s.h != x.height() || s.w != x.width())
      throw DataError("precomputed segmentation dims disagree with image for '" + id + "'");
    return s;
  }
  if (!model_) throw DataError("segmentation adapter configured with neither maps nor model");
  SegmentationMap s;
  try {
    s = model_(x);
  } catch (const std::exception& e) {
    throw BackendError(std::string("segmentation model failed: ") + e.what());
  }
  s.num_labels = num_labels_;
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Bundle

NetworkBundle NetworkBundle::build(Variant variant, int num_labels, int alpha, uint64_t seed) {
  NetworkBundle b;
  b.variant = variant;
  b.num_labels = num_labels;
  b.alpha = alpha;
  bool seg = variant_uses_seg(variant);
  Rng r0 = make_rng(seed, 0), r1 = make_rng(seed, 1), r2 = make_rng(seed, 2),
      r3 = make_rng(seed, 3);
  b.compnet = CompNet(num_labels, alpha, seg, r0);
  if (variant_uses_finenet(variant)) b.finenet = FineNet(num_labels, seg, r1);
  b.d1 = Discriminator(num_labels, seg, 1, r2);
  b.d2 = Discriminator(num_labels, seg, 2, r3);
  return b;
}

std::vector<Parameter*> NetworkBundle::generator_params() {
  std::vector<Parameter*> out = compnet.net.params();
  if (!finenet.net.empty()) {
    auto f = finenet.net.params();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

std::vector<Parameter*> NetworkBundle::discriminator_params() {
  std::vector<Parameter*> out = d1.net.params();
  auto p2 = d2.net.params();
  out.insert(out.end(), p2.begin(), p2.end());
  return out;
}

std::vector<Parameter*> NetworkBundle::all_params() {
  auto out = generator_params();
  auto d = discriminator_params();
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

void NetworkBundle::append_blocks(WeightsFile* wf, bool include_discriminators) const {
  auto* self = const_cast<NetworkBundle*>(this);
  auto add = [wf](const std::vector<Parameter*>& ps) {
    for (const Parameter* p : ps) wf->blocks.push_back({p->name, p->shape, p->w});
  };
  add(self->generator_params());
  if (include_discriminators) add(self->discriminator_params());
}

NetworkBundle NetworkBundle::from_file(const WeightsFile& wf) {
  NetworkBundle b = build(static_cast<Variant>(wf.variant), wf.num_labels, wf.alpha, /*seed=*/0);
  for (Parameter* p : b.all_params()) {
    const WeightsBlock* blk = wf.find_block(p->name);
    if (blk == nullptr) continue;
    if (blk->shape != p->shape) throw DataError("weights block shape mismatch: " + p->name);
    p->w = blk->data;
  }
  // Generator parameters must all be present; discriminators are optional.
  for (Parameter* p : b.generator_params())
    if (wf.find_block(p->name) == nullptr)
      throw DataError("weights file missing generator block: " + p->name);
  return b;
}

void NetworkBundle::save(const std::string& path) const {
  WeightsFile wf;
  wf.variant = static_cast<uint8_t>(variant);
  wf.num_labels = static_cast<uint8_t>(num_labels);
  wf.alpha = static_cast<uint8_t>(alpha);
  append_blocks(&wf, /*include_discriminators=*/false);
  wf.save(path);
}

NetworkBundle NetworkBundle::load(const std::string& path) {
  return from_file(WeightsFile::load(path));
}

}  // namespace dsslic
