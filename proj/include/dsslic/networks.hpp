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

#ifndef DSSLIC_NETWORKS_HPP_
#define DSSLIC_NETWORKS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsslic/image.hpp"
#include "dsslic/nn.hpp"

namespace dsslic {

// Pipeline configurations of the ablation study. upComp drops the
// fine-information generator (x' = c'), noSeg drops the segmentation inputs
// everywhere, synth matches withSeg but keeps the perceptual losses for all
// training epochs.
enum class Variant : uint8_t { kUpComp = 0, kNoSeg = 1, kWithSeg = 2, kSynth = 3 };

bool variant_uses_seg(Variant v);
bool variant_uses_finenet(Variant v);
bool variant_perceptual_all_epochs(Variant v);
std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

// ---------------------------------------------------------------------------
// Architecture specs

enum class LayerKind : uint8_t {
  kConv7,     // 7x7 stride-1 conv, instance norm, ReLU (c_k)
  kDown,      // 3x3 stride-2 conv, instance norm, ReLU (d_k)
  kResidual,  // reflect-padded residual block (r_k)
  kUp,        // 3x3 stride-1/2 fractional conv, instance norm, ReLU (u_k)
  kDiscConv,  // 4x4 stride-2 conv, instance norm, LeakyReLU (C_k)
  kScoreConv  // final 1-filter conv of a discriminator
};

struct LayerSpec {
  LayerKind kind;
  int filters;
  int kernel;
  int stride;
  bool norm;
  Act act;
};

struct NetworkSpec {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<LayerSpec> layers;
};

// c64, d128..d512 (one d per halving), c3 + tanh. alpha must be a power of
// two; the number of downsampling layers is log2(alpha).
NetworkSpec compnet_spec(int in_channels, int alpha);
// c64, d128, d256, d512, 9x r512, u256, u128, u64, c3 + tanh.
NetworkSpec finenet_spec(int in_channels);
// C64, C128, C256, C512 plus the final 1-filter score layer.
NetworkSpec discriminator_spec(int in_channels);

SequentialNet build_from_spec(const NetworkSpec& spec, const std::string& prefix, Rng& rng);

// ---------------------------------------------------------------------------
// Generators

// Maps (image, one-hot segmentation) to the alpha-downsampled compact
// representation in [-1,1]. Input dims must be divisible by alpha.
class CompNet {
 public:
  CompNet() = default;
  CompNet(int num_labels, int alpha, bool use_seg, Rng& rng);

  // x: (3,h,w) canonical plane; seg ignored when built without seg inputs.
  Tensor forward(const Tensor& x, const SegmentationMap* seg, NetCache* cc);
  Tensor backward(const Tensor& g_compact, const NetCache& cc);  // grad w.r.t. x slice

  SequentialNet net;
  int num_labels = 0, alpha = 8;
  bool use_seg = true;
};

// Maps (one-hot segmentation, upsampled compact image) to the fine
// information image f in [-1,1]; spatial dims are preserved.
class FineNet {
 public:
  FineNet() = default;
  FineNet(int num_labels, bool use_seg, Rng& rng);

  Tensor forward(const SegmentationMap* seg, const Tensor& c_up, NetCache* cc);
  // Returns grad w.r.t. the c' input slice.
  Tensor backward(const Tensor& g_f, const NetCache& cc);

  SequentialNet net;
  int num_labels = 0;
  bool use_seg = true;
};

// ---------------------------------------------------------------------------
// Discriminators

struct DiscOutput {
  Tensor score;                  // (1, h/16, w/16) raw (pre-sigmoid) map
  std::vector<Tensor> features;  // one per C_k layer, shallow to deep
};

struct DiscGrad {
  Tensor g_cprime;  // grad w.r.t. the conditioned c' slice
  Tensor g_image;   // grad w.r.t. the judged image slice
};

// PatchGAN-style conditional discriminator over concat(one-hot s, c', x).
// scale=2 instances expect inputs already 2x downsampled by the caller.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int num_labels, bool use_seg, int scale, Rng& rng);

  DiscOutput forward(const SegmentationMap* seg, const Tensor& c_up, const Tensor& image,
                     NetCache* cc);
  // g_features may be empty or hold one grad per C_k feature.
  DiscGrad backward(const Tensor& g_score, const std::vector<Tensor>& g_features,
                    const NetCache& cc);

  SequentialNet net;  // four C_k units + score unit
  int num_labels = 0, scale = 1;
  bool use_seg = true;

  static constexpr int kFeatureLayers = 4;
};

// ---------------------------------------------------------------------------
// Segmentation handling

// One-hot channel encoding of a label field: (num_labels, h, w) with exactly
// one 1 per pixel. Throws DataError on out-of-range labels.
Tensor encode_segmentation_input(const SegmentationMap& s);

// Adapts an external segmentation source: either a directory of precomputed
// single-channel label images keyed by image id, or a model callback.
class SegnetAdapter {
 public:
  using ModelFn = std::function<SegmentationMap(const ImagePlane&)>;

  static SegnetAdapter from_directory(const std::string& dir, int num_labels);
  static SegnetAdapter from_model(ModelFn fn, int num_labels);

  // id is the source image's filename stem for directory lookups.
  SegmentationMap segment(const ImagePlane& x, const std::string& id) const;
  int num_labels() const { return num_labels_; }

 private:
  SegnetAdapter() = default;
  std::string dir_;
  ModelFn model_;
  int num_labels_ = 0;
};

// ---------------------------------------------------------------------------
// Bundle

// Everything the codec and trainer need for one variant: both generators and
// (for training) the two-scale discriminators.
struct NetworkBundle {
  Variant variant = Variant::kWithSeg;
  int num_labels = 0;
  int alpha = 8;

  CompNet compnet;
  FineNet finenet;  // unused for upComp
  Discriminator d1, d2;

  static NetworkBundle build(Variant variant, int num_labels, int alpha, uint64_t seed);

  std::vector<Parameter*> generator_params();
  std::vector<Parameter*> discriminator_params();
  std::vector<Parameter*> all_params();

  // Appends one block per parameter; include_discriminators is only needed
  // for training checkpoints.
  void append_blocks(struct WeightsFile* wf, bool include_discriminators) const;
  // Rebuilds from the file's metadata and fills every parameter found by
  // name. Throws DataError on shape mismatch or missing generator blocks.
  static NetworkBundle from_file(const struct WeightsFile& wf);

  void save(const std::string& path) const;
  static NetworkBundle load(const std::string& path);
};

}  // namespace dsslic

#endif  // DSSLIC_NETWORKS_HPP_
