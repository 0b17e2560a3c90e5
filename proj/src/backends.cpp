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

#include "dsslic/backends.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <opencv2/imgcodecs.hpp>

namespace dsslic {

namespace {

namespace fs = std::filesystem;

cv::Mat to_mat(const ImageU8& img) {
  cv::Mat m(img.h, img.w, img.k == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      if (img.k == 3) {
        m.at<cv::Vec3b>(y, x) = {img.at(y, x, 2), img.at(y, x, 1), img.at(y, x, 0)};
      } else {
        m.at<uint8_t>(y, x) = img.at(y, x, 0);
      }
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

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw BackendError("cannot read: " + path);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw BackendError("cannot write: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string png_encode(const ImageU8& img) {
  std::vector<uint8_t> buf;
  if (!cv::imencode(".png", to_mat(img), buf, {cv::IMWRITE_PNG_COMPRESSION, 9}))
    throw BackendError("png encode failed");
  return std::string(buf.begin(), buf.end());
}

ImageU8 png_decode(const std::string& bytes) {
  std::vector<uint8_t> buf(bytes.begin(), bytes.end());
  cv::Mat m = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  if (m.empty() || m.depth() != CV_8U) throw BackendError("png decode failed");
  return from_mat(m);
}

}  // namespace

int run_command(const std::string& cmd) {
  int status = std::system(cmd.c_str());
  if (status < 0) throw BackendError("cannot run command: " + cmd);
  return status;
}

TempDir::TempDir() {
  static std::atomic<uint64_t> counter{0};
  fs::path base = fs::temp_directory_path();
  fs::path dir =
      base / ("dsslic-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  dir_ = dir.string();
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(dir_, ec);
}

std::string TempDir::path(const std::string& filename) const { return dir_ + "/" + filename; }

// ---------------------------------------------------------------------------
// PNG

std::string PngCodec::encode(const ImageU8& img) const { return png_encode(img); }
ImageU8 PngCodec::decode(const std::string& bytes) const { return png_decode(bytes); }

// ---------------------------------------------------------------------------
// FLIF (external)

std::string FlifCodec::encode(const ImageU8& img) const {
  TempDir tmp;
  std::string in = tmp.path("in.png"), out = tmp.path("out.flif");
  write_file(in, png_encode(img));
  int rc = run_command(binary_ + " -e --overwrite \"" + in + "\" \"" + out + "\"");
  if (rc != 0) throw BackendError("flif encoder exited with status " + std::to_string(rc));
  return read_file(out);
}

ImageU8 FlifCodec::decode(const std::string& bytes) const {
  TempDir tmp;
  std::string in = tmp.path("in.flif"), out = tmp.path("out.png");
  write_file(in, bytes);
  int rc = run_command(binary_ + " -d --overwrite \"" + in + "\" \"" + out + "\"");
  if (rc != 0) throw BackendError("flif decoder exited with status " + std::to_string(rc));
  return png_decode(read_file(out));
}

// ---------------------------------------------------------------------------
// Quantize + PNG

int QuantPngCodec::quality_to_step(int quality) {
  // HEVC-style quantizer: the step doubles every 6 quality points.
  double step = std::pow(2.0, (quality - 4) / 6.0);
  return std::max(1, static_cast<int>(std::lround(step)));
}

std::string QuantPngCodec::encode(const ImageU8& img, int quality) const {
  const int step = quality_to_step(quality);
  ImageU8 q = img;
  if (step > 1) {
    for (auto& v : q.v)
      v = static_cast<uint8_t>(std::min(255l, std::lround(double(v) / step) * step));
  }
  return png_encode(q);
}

ImageU8 QuantPngCodec::decode(const std::string& bytes) const { return png_decode(bytes); }

// ---------------------------------------------------------------------------
// BPG (external)

std::string BpgCodec::encode(const ImageU8& img, int quality) const {
  TempDir tmp;
  std::string in = tmp.path("in.png"), out = tmp.path("out.bpg");
  write_file(in, png_encode(img));
  int rc = run_command(encoder_ + " -q " + std::to_string(quality) + " -f 444 -o \"" + out +
                       "\" \"" + in + "\"");
  if (rc != 0) throw BackendError("bpgenc exited with status " + std::to_string(rc));
  return read_file(out);
}

ImageU8 BpgCodec::decode(const std::string& bytes) const {
  TempDir tmp;
  std::string in = tmp.path("in.bpg"), out = tmp.path("out.png");
  write_file(in, bytes);
  int rc = run_command(decoder_ + " -o \"" + out + "\" \"" + in + "\"");
  if (rc != 0) throw BackendError("bpgdec exited with status " + std::to_string(rc));
  return png_decode(read_file(out));
}

// ---------------------------------------------------------------------------
// Registry

BackendRegistry::BackendRegistry(const std::string& flif_binary, const std::string& bpg_encoder,
                                 const std::string& bpg_decoder) {
  lossless_.push_back(std::make_unique<PngCodec>());
  lossy_.push_back(std::make_unique<QuantPngCodec>());
  if (!flif_binary.empty()) {
    lossless_.push_back(std::make_unique<FlifCodec>(flif_binary));
    lossless_default_ = lossless_.size() - 1;
  }
  if (!bpg_encoder.empty()) {
    lossy_.push_back(std::make_unique<BpgCodec>(bpg_encoder,
                                                bpg_decoder.empty() ? "bpgdec" : bpg_decoder));
    lossy_default_ = lossy_.size() - 1;
  }
}

const LosslessCodec& BackendRegistry::lossless_default() const {
  return *lossless_[lossless_default_];
}
const LossyCodec& BackendRegistry::lossy_default() const { return *lossy_[lossy_default_]; }

const LosslessCodec& BackendRegistry::lossless_by_id(uint8_t id) const {
  for (const auto& c : lossless_)
    if (c->id() == id) return *c;
  throw DataError("container uses unavailable lossless backend id " + std::to_string(id));
}

const LossyCodec& BackendRegistry::lossy_by_id(uint8_t id) const {
  for (const auto& c : lossy_)
    if (c->id() == id) return *c;
  throw DataError("container uses unavailable lossy backend id " + std::to_string(id));
}

}  // namespace dsslic
