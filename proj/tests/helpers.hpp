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

#ifndef DSSLIC_TESTS_HELPERS_HPP_
#define DSSLIC_TESTS_HELPERS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "dsslic/dataset.hpp"
#include "dsslic/image.hpp"

namespace dsslic::testing {

// Scratch directory for one test, removed on destruction.
class TempTree {
 public:
  explicit TempTree(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("dsslic-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempTree() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& rel = "") const {
    return rel.empty() ? dir_.string() : (dir_ / rel).string();
  }

 private:
  std::filesystem::path dir_;
};

// Synthetic scene: a two-color gradient background with a few labeled
// rectangles and mild noise. Values stay inside [16, 240] and the label
// field marks the rectangle regions, so segmentation genuinely describes
// the image content.
inline void synth_scene(int h, int w, int num_labels, uint64_t seed, ImageU8* image,
                        SegmentationMap* labels) {
  Rng rng = make_rng(seed, 42);
  std::uniform_int_distribution<int> color(32, 224);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  *image = ImageU8(h, w, 3);
  *labels = SegmentationMap(h, w, num_labels);

  int c0[3], c1[3];
  for (int i = 0; i < 3; ++i) {
    c0[i] = color(rng);
    c1[i] = color(rng);
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double t = double(x + y) / (h + w - 2);
      for (int ci = 0; ci < 3; ++ci)
        image->at(y, x, ci) = static_cast<uint8_t>(c0[ci] + t * (c1[ci] - c0[ci]));
    }

  const int nrect = std::min(3, num_labels - 1);
  for (int r = 0; r < nrect; ++r) {
    int rw = std::max(2, int(unit(rng) * w / 2)), rh = std::max(2, int(unit(rng) * h / 2));
    int x0 = int(unit(rng) * (w - rw)), y0 = int(unit(rng) * (h - rh));
    int rc[3] = {color(rng), color(rng), color(rng)};
    for (int y = y0; y < y0 + rh; ++y)
      for (int x = x0; x < x0 + rw; ++x) {
        for (int ci = 0; ci < 3; ++ci) image->at(y, x, ci) = static_cast<uint8_t>(rc[ci]);
        labels->at(y, x) = r + 1;
      }
  }

  std::uniform_int_distribution<int> noise(-6, 6);
  for (auto& v : image->v) v = static_cast<uint8_t>(std::clamp(int(v) + noise(rng), 16, 240));
}

inline std::vector<DatasetItem> make_toy_items(int n, int h, int w, int num_labels,
                                               uint64_t seed) {
  std::vector<DatasetItem> items;
  for (int i = 0; i < n; ++i) {
    DatasetItem it;
    synth_scene(h, w, num_labels, seed + i, &it.image, &it.segmentation);
    char id[32];
    std::snprintf(id, sizeof(id), "toy%03d", i);
    it.id = id;
    items.push_back(std::move(it));
  }
  return items;
}

// Writes items as an images/ + labels/ directory pair.
inline void write_dataset(const std::string& root, const std::vector<DatasetItem>& items) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "labels");
  for (const auto& it : items) {
    save_image(root + "/images/" + it.id + ".png", it.image);
    save_label_map(root + "/labels/" + it.id + ".png", it.segmentation);
  }
}

}  // namespace dsslic::testing

#endif  // DSSLIC_TESTS_HELPERS_HPP_
