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

#ifndef DSSLIC_EVALUATION_HPP_
#define DSSLIC_EVALUATION_HPP_

// Rate-distortion evaluation: per-quality averages of (bpp, PSNR, MS-SSIM)
// for the layered pipeline and for the baseline codecs, ablation tables over
// the pipeline variants, and CSV/SVG emission.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsslic/codec.hpp"
#include "dsslic/metrics.hpp"

namespace dsslic {

struct RDPoint {
  double bpp = 0;
  double psnr = 0;
  double msssim = 0;
  std::string codec;
  int quality = 0;
};

struct RDCurve {
  std::string codec;
  std::string dataset;
  int n_images = 0;
  std::vector<RDPoint> points;  // sorted by bpp
  std::vector<std::string> failures;
};

// A codec under evaluation: returns (decoded image, coded byte count).
using CodecFn = std::function<std::pair<ImageU8, size_t>(const ImageU8& image, int quality,
                                                         size_t image_index)>;

// One averaged RDPoint per quality. Per-point backend failures are recorded
// in `failures` and the curve is completed with the remaining points.
RDCurve sweep_rd(const std::vector<ImageU8>& images, const CodecFn& codec,
                 const std::string& codec_name, const std::string& dataset_name,
                 const std::vector<int>& qualities);

// Wraps a layered pipeline (with per-image segmentation ids) as a CodecFn.
CodecFn pipeline_codec_fn(Pipeline* pipeline, std::vector<std::string> ids);

struct BaselinePaths {
  std::string bpg_encoder, bpg_decoder;
};

struct BaselineResult {
  ImageU8 decoded;
  size_t bytes = 0;
};

// JPEG / JPEG2000 / WebP via the imaging library in RGB (4:4:4 where the
// format supports it); BPG via external binaries. Throws BackendError when
// the codec is unavailable.
BaselineResult baseline_codec(const ImageU8& image, const std::string& codec, int quality,
                              const BaselinePaths& paths = {});

CodecFn baseline_codec_fn(const std::string& codec, const BaselinePaths& paths = {});

// ---------------------------------------------------------------------------
// Ablation table

struct AblationColumn {
  Variant variant;
  double bpp = 0, psnr = 0, msssim = 0;
};

struct AblationTable {
  std::vector<AblationColumn> columns;  // paper order: upComp, synth, noSeg, withSeg
  std::vector<std::string> notes;       // omitted variants etc.
};

// Runs every available variant without the residual layer and averages the
// metrics over the images. Missing weights produce a note, not an error.
AblationTable ablation_table(const std::vector<ImageU8>& images,
                             const std::vector<std::string>& ids,
                             const std::map<Variant, std::string>& weights_paths,
                             const SegnetAdapter* segnet, const BackendRegistry& backends);

// ---------------------------------------------------------------------------
// Output files

// Schema: dataset, codec, quality, bpp, psnr_db, msssim, n_images.
void write_rd_csv(const std::string& path, const RDCurve& curve);
// Two-column-per-variant layout mirroring the ablation study.
void write_ablation_csv(const std::string& path, const AblationTable& table);
// Simple static plot, one polyline per curve. metric is "psnr" or "msssim".
void write_rd_plot_svg(const std::string& path, const std::vector<RDCurve>& curves,
                       const std::string& metric);

}  // namespace dsslic

#endif  // DSSLIC_EVALUATION_HPP_
