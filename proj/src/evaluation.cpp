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

#include "dsslic/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <opencv2/imgcodecs.hpp>

namespace dsslic {

RDCurve sweep_rd(const std::vector<ImageU8>& images, const CodecFn& codec,
                 const std::string& codec_name, const std::string& dataset_name,
                 const std::vector<int>& qualities) {
  RDCurve curve;
  curve.codec = codec_name;
  curve.dataset = dataset_name;
  curve.n_images = static_cast<int>(images.size());
  for (int q : qualities) {
    double bpp_sum = 0, psnr_sum = 0, msssim_sum = 0;
    int ok = 0;
    for (size_t i = 0; i < images.size(); ++i) {
      try {
        auto [decoded, bytes] = codec(images[i], q, i);
        bpp_sum += bpp(bytes, images[i].h, images[i].w, images[i].k);
        psnr_sum += psnr(images[i], decoded);
        msssim_sum += ms_ssim(images[i], decoded);
        ++ok;
      } catch (const Error& e) {
        curve.failures.push_back(codec_name + " q=" + std::to_string(q) + " image " +
                                 std::to_string(i) + ": " + e.what());
      }
    }
    if (ok == 0) continue;
    RDPoint p;
    p.codec = codec_name;
    p.quality = q;
    p.bpp = bpp_sum / ok;
    p.psnr = psnr_sum / ok;
    p.msssim = msssim_sum / ok;
    curve.points.push_back(p);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
  return curve;
}

CodecFn pipeline_codec_fn(Pipeline* pipeline, std::vector<std::string> ids) {
  return [pipeline, ids = std::move(ids)](const ImageU8& img, int quality, size_t idx) {
    Pipeline p = *pipeline;
    p.quality = quality;
    LayeredBitstream b = p.encode(img, idx < ids.size() ? ids[idx] : std::to_string(idx));
    DecodeResult d = p.decode(b);
    return std::make_pair(std::move(d.image), b.total_bytes());
  };
}

// ---------------------------------------------------------------------------
// Baselines

namespace {

cv::Mat to_mat(const ImageU8& img) {
  cv::Mat m(img.h, img.w, img.k == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      if (img.k == 3)
        m.at<cv::Vec3b>(y, x) = {img.at(y, x, 2), img.at(y, x, 1), img.at(y, x, 0)};
      else
        m.at<uint8_t>(y, x) = img.at(y, x, 0);
    }
  return m;
}

ImageU8 from_mat(const cv::Mat& m) {
  ImageU8 img(m.rows, m.cols, m.channels());
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      if (m.channels() == 3) {
        cv::Vec3b px = m.at<cv::Vec3b>(y, x);
        img.at(y, x, 0) = px[2];
        img.at(y, x, 1) = px[1];
        img.at(y, x, 2) = px[0];
      } else {
        img.at(y, x, 0) = m.at<uint8_t>(y, x);
      }
    }
  return img;
}

BaselineResult imencode_roundtrip(const ImageU8& image, const std::string& ext,
                                  const std::vector<int>& params) {
  std::vector<uint8_t> buf;
  bool ok = false;
  try {
    ok = cv::imencode(ext, to_mat(image), buf, params);
  } catch (const cv::Exception& e) {
    throw BackendError("codec " + ext + " unavailable: " + e.what());
  }
  if (!ok || buf.empty()) throw BackendError("codec " + ext + " produced no output");
  cv::Mat m = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (m.empty()) throw BackendError("codec " + ext + " output failed to decode");
  return {from_mat(m), buf.size()};
}

}  // namespace

BaselineResult baseline_codec(const ImageU8& image, const std::string& codec, int quality,
                              const BaselinePaths& paths) {
  if (codec == "jpeg") {
    // This library build predates selectable JPEG chroma sampling; only BPG
    // among the baselines takes an explicit 4:4:4 flag here.
    return imencode_roundtrip(image, ".jpg",
                              {cv::IMWRITE_JPEG_QUALITY, std::clamp(quality, 1, 100)});
  }
  if (codec == "webp") {
    return imencode_roundtrip(image, ".webp",
                              {cv::IMWRITE_WEBP_QUALITY, std::clamp(quality, 1, 100)});
  }
  if (codec == "jpeg2000") {
    return imencode_roundtrip(
        image, ".jp2", {cv::IMWRITE_JPEG2000_COMPRESSION_X1000, std::clamp(quality * 10, 1, 1000)});
  }
  if (codec == "bpg") {
    if (paths.bpg_encoder.empty())
      throw BackendError("bpg binaries not configured (--backend-bpg)");
    BpgCodec bpg(paths.bpg_encoder, paths.bpg_decoder);
    std::string bytes = bpg.encode(image, quality);
    return {bpg.decode(bytes), bytes.size()};
  }
  throw UsageError("unknown baseline codec: " + codec);
}

CodecFn baseline_codec_fn(const std::string& codec, const BaselinePaths& paths) {
  return [codec, paths](const ImageU8& img, int quality, size_t) {
    BaselineResult r = baseline_codec(img, codec, quality, paths);
    return std::make_pair(std::move(r.decoded), r.bytes);
  };
}

// ---------------------------------------------------------------------------
// Ablation table

AblationTable ablation_table(const std::vector<ImageU8>& images,
                             const std::vector<std::string>& ids,
                             const std::map<Variant, std::string>& weights_paths,
                             const SegnetAdapter* segnet, const BackendRegistry& backends) {
  AblationTable table;
  for (Variant v : {Variant::kUpComp, Variant::kSynth, Variant::kNoSeg, Variant::kWithSeg}) {
    auto it = weights_paths.find(v);
    if (it == weights_paths.end() || it->second.empty()) {
      table.notes.push_back("variant " + variant_name(v) + " omitted: no weights provided");
      continue;
    }
    NetworkBundle nets = NetworkBundle::load(it->second);
    Pipeline pipe = pipeline_variant(v, &nets, &backends);
    pipe.segnet = segnet;
    AblationColumn col;
    col.variant = v;
    for (size_t i = 0; i < images.size(); ++i) {
      LayeredBitstream b = pipe.encode(images[i], i < ids.size() ? ids[i] : std::to_string(i));
      DecodeResult d = pipe.decode(b);
      col.bpp += bpp(b.total_bytes(), images[i].h, images[i].w, images[i].k);
      col.psnr += psnr(images[i], d.image);
      col.msssim += ms_ssim(images[i], d.image);
    }
    const double n = static_cast<double>(images.size());
    col.bpp /= n;
    col.psnr /= n;
    col.msssim /= n;
    table.columns.push_back(col);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Output files

void write_rd_csv(const std::string& path, const RDCurve& curve) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write: " + path);
  f << "dataset,codec,quality,bpp,psnr_db,msssim,n_images\n";
  for (const RDPoint& p : curve.points) {
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%s,%d,%.6f,%.4f,%.6f,%d\n", curve.dataset.c_str(),
                  curve.codec.c_str(), p.quality, p.bpp, p.psnr, p.msssim, curve.n_images);
    f << row;
  }
}

void write_ablation_csv(const std::string& path, const AblationTable& table) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write: " + path);
  f << "metric";
  for (const auto& c : table.columns) f << "," << variant_name(c.variant);
  f << "\n";
  auto row = [&](const char* name, auto get) {
    f << name;
    for (const auto& c : table.columns) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.4f", get(c));
      f << buf;
    }
    f << "\n";
  };
  row("bpp", [](const AblationColumn& c) { return c.bpp; });
  row("psnr", [](const AblationColumn& c) { return c.psnr; });
  row("msssim", [](const AblationColumn& c) { return c.msssim; });
  for (const auto& note : table.notes) f << "# " << note << "\n";
}

void write_rd_plot_svg(const std::string& path, const std::vector<RDCurve>& curves,
                       const std::string& metric) {
  const bool use_psnr = metric == "psnr";
  if (!use_psnr && metric != "msssim") throw UsageError("plot metric must be psnr or msssim");

  double xmin = 1e30, xmax = -1e30, ymin = 1e30, ymax = -1e30;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      double y = use_psnr ? p.psnr : p.msssim;
      xmin = std::min(xmin, p.bpp);
      xmax = std::max(xmax, p.bpp);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-9) xmax = xmin + 1e-9;
  if (ymax - ymin < 1e-9) ymax = ymin + 1e-9;

  const int W = 640, H = 480, M = 56;
  auto px = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
  auto py = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write: " + path);
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n", W, H);
  f << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n"
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                M, H - M, W - M, H - M, M, M, M, H - M);
  f << buf;
  for (int t = 0; t <= 4; ++t) {
    double xv = xmin + (xmax - xmin) * t / 4.0, yv = ymin + (ymax - ymin) * t / 4.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%d\" font-size=\"11\" text-anchor=\"middle\">%.3f</text>\n",
                  px(xv), H - M + 16, xv);
    f << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.3f</text>\n",
                  M - 6, py(yv) + 4, yv);
    f << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\">bpp</text>\n",
                W / 2, H - 12);
  f << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"14\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 14 %d)\">%s</text>\n",
                H / 2, H / 2, use_psnr ? "PSNR (dB)" : "MS-SSIM");
  f << buf;

  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const char* color = colors[ci % 6];
    std::string pts;
    for (const auto& p : curves[ci].points) {
      char pb[64];
      std::snprintf(pb, sizeof(pb), "%.1f,%.1f ", px(p.bpp), py(use_psnr ? p.psnr : p.msssim));
      pts += pb;
    }
    if (!pts.empty()) {
      f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
        << pts << "\"/>\n";
      for (const auto& p : curves[ci].points) {
        std::snprintf(buf, sizeof(buf), "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"2.5\" fill=\"%s\"/>\n",
                      px(p.bpp), py(use_psnr ? p.psnr : p.msssim), color);
        f << buf;
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%zu\" font-size=\"12\" fill=\"%s\">%s</text>\n", W - M - 110,
                  M + 16 * ci + 4, color, curves[ci].codec.c_str());
    f << buf;
  }
  f << "</svg>\n";
}

}  // namespace dsslic
