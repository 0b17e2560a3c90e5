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

#include "dsslic/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>

namespace dsslic {

void validate(const ImagePlane& p) {
  if (p.height() < 1 || p.width() < 1) throw DataError("ImagePlane: empty spatial dims");
  if (p.channels() != 1 && p.channels() != 3) throw DataError("ImagePlane: k must be 1 or 3");
  for (float v : p.data.v) {
    if (!(v >= p.range.lo && v <= p.range.hi))
      throw DataError("ImagePlane: value outside declared range");
  }
}

void validate(const SegmentationMap& s) {
  if (s.num_labels < 1) throw DataError("SegmentationMap: num_labels must be positive");
  for (int32_t l : s.labels) {
    if (l < 0 || l >= s.num_labels) throw DataError("SegmentationMap: label out of range");
  }
}

float dequantize_u8(uint8_t u) { return static_cast<float>(u) / 127.5f - 1.f; }

uint8_t quantize_unit(float v) {
  long r = std::lround((static_cast<double>(v) + 1.0) * 127.5);
  return static_cast<uint8_t>(std::clamp(r, 0l, 255l));
}

ImagePlane to_plane(const ImageU8& img) {
  ImagePlane p;
  p.data = Tensor(img.k, img.h, img.w);
  for (int ci = 0; ci < img.k; ++ci)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) p.data.at(ci, y, x) = dequantize_u8(img.at(y, x, ci));
  return p;
}

ImageU8 to_u8(const ImagePlane& p) {
  ImageU8 img(p.height(), p.width(), p.channels());
  for (int ci = 0; ci < img.k; ++ci)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) img.at(y, x, ci) = quantize_unit(p.data.at(ci, y, x));
  return img;
}

Tensor pad_to_multiple(const Tensor& t, int m) {
  int ph = round_up(t.h, m), pw = round_up(t.w, m);
  if (ph == t.h && pw == t.w) return t;
  Tensor out(t.c, ph, pw);
  for (int ci = 0; ci < t.c; ++ci)
    for (int y = 0; y < t.h; ++y)
      for (int x = 0; x < t.w; ++x) out.at(ci, y, x) = t.at(ci, y, x);
  return out;
}

SegmentationMap pad_to_multiple(const SegmentationMap& s, int m) {
  int ph = round_up(s.h, m), pw = round_up(s.w, m);
  if (ph == s.h && pw == s.w) return s;
  SegmentationMap out(ph, pw, s.num_labels);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) out.at(y, x) = s.at(y, x);
  return out;
}

Tensor crop(const Tensor& t, int h, int w) {
  if (h == t.h && w == t.w) return t;
  Tensor out(t.c, h, w);
  for (int ci = 0; ci < t.c; ++ci)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(ci, y, x) = t.at(ci, y, x);
  return out;
}

namespace {

ImageU8 from_mat(const cv::Mat& m) {
  ImageU8 img(m.rows, m.cols, m.channels());
  if (m.channels() == 3) {
    for (int y = 0; y < m.rows; ++y) {
      const cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
      for (int x = 0; x < m.cols; ++x) {
        img.at(y, x, 0) = row[x][2];  // BGR -> RGB
        img.at(y, x, 1) = row[x][1];
        img.at(y, x, 2) = row[x][0];
      }
    }
  } else {
    for (int y = 0; y < m.rows; ++y) {
      const uint8_t* row = m.ptr<uint8_t>(y);
      for (int x = 0; x < m.cols; ++x) img.at(y, x, 0) = row[x];
    }
  }
  return img;
}

cv::Mat to_mat(const ImageU8& img) {
  cv::Mat m(img.h, img.w, img.k == 3 ? CV_8UC3 : CV_8UC1);
  if (img.k == 3) {
    for (int y = 0; y < img.h; ++y) {
      cv::Vec3b* row = m.ptr<cv::Vec3b>(y);
      for (int x = 0; x < img.w; ++x) {
        row[x][0] = img.at(y, x, 2);
        row[x][1] = img.at(y, x, 1);
        row[x][2] = img.at(y, x, 0);
      }
    }
  } else {
    for (int y = 0; y < img.h; ++y) {
      uint8_t* row = m.ptr<uint8_t>(y);
      for (int x = 0; x < img.w; ++x) row[x] = img.at(y, x, 0);
    }
  }
  return m;
}

}  // namespace

ImageU8 load_image(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
  if (m.empty()) throw DataError("cannot read image: " + path);
  return from_mat(m);
}

void save_image(const std::string& path, const ImageU8& img) {
  if (!cv::imwrite(path, to_mat(img))) throw DataError("cannot write image: " + path);
}

ImageU8 resize_image(const ImageU8& img, int out_h, int out_w, bool nearest) {
  cv::Mat src = to_mat(img), dst;
  cv::resize(src, dst, cv::Size(out_w, out_h), 0, 0,
             nearest ? cv::INTER_NEAREST : cv::INTER_AREA);
  return from_mat(dst);
}

SegmentationMap load_label_map(const std::string& path, int num_labels) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED | cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw DataError("cannot read label map: " + path);
  if (m.depth() != CV_8U && m.depth() != CV_16U)
    throw DataError("label map must be 8-bit or 16-bit single channel: " + path);
  SegmentationMap s(m.rows, m.cols, num_labels);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      int32_t l = m.depth() == CV_8U ? m.at<uint8_t>(y, x) : m.at<uint16_t>(y, x);
      if (l < 0 || l >= num_labels)
        throw DataError("label map value " + std::to_string(l) + " out of range in " + path);
      s.at(y, x) = l;
    }
  return s;
}

void save_label_map(const std::string& path, const SegmentationMap& s) {
  cv::Mat m(s.h, s.w, s.num_labels <= 256 ? CV_8U : CV_16U);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) {
      if (m.depth() == CV_8U)
        m.at<uint8_t>(y, x) = static_cast<uint8_t>(s.at(y, x));
      else
        m.at<uint16_t>(y, x) = static_cast<uint16_t>(s.at(y, x));
    }
  if (!cv::imwrite(path, m)) throw DataError("cannot write label map: " + path);
}

}  // namespace dsslic
