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

#include "dsslic/dataset.hpp"

#include <algorithm>
#include <filesystem>

namespace dsslic {

namespace fs = std::filesystem;

ResizeRule parse_resize_rule(const std::string& name) {
  if (name == "cityscapes") return ResizeRule::kCityscapes;
  if (name == "ade20k") return ResizeRule::kAde20k;
  if (name == "none") return ResizeRule::kNone;
  throw DataError("unknown resize rule: " + name + " (expected cityscapes|ade20k|none)");
}

std::string resize_rule_name(ResizeRule r) {
  switch (r) {
    case ResizeRule::kCityscapes: return "cityscapes";
    case ResizeRule::kAde20k: return "ade20k";
    case ResizeRule::kNone: return "none";
  }
  return "?";
}

IngestResult ingest_dataset(const std::string& root, ResizeRule rule, int num_labels,
                            bool require_labels) {
  fs::path images_dir = fs::path(root) / "images";
  fs::path labels_dir = fs::path(root) / "labels";
  if (!fs::is_directory(images_dir))
    throw DataError("dataset root has no images/ directory: " + root);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(images_dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  IngestResult out;
  for (const auto& f : files) {
    std::string stem = f.stem().string();
    ImageU8 img;
    try {
      img = load_image(f.string());
    } catch (const DataError&) {
      ++out.skipped_unpaired;
      continue;
    }

    if (rule == ResizeRule::kAde20k && std::max(img.h, img.w) < 512) {
      ++out.skipped_filtered;
      continue;
    }

    int th = img.h, tw = img.w;
    if (rule == ResizeRule::kCityscapes) {
      th = 512;
      tw = 1024;
    } else if (rule == ResizeRule::kAde20k) {
      th = 256;
      tw = 256;
    }
    if (th != img.h || tw != img.w) img = resize_image(img, th, tw, /*nearest=*/false);

    fs::path label_path = labels_dir / (stem + ".png");
    SegmentationMap seg;
    if (fs::exists(label_path)) {
      seg = load_label_map(label_path.string(), num_labels);
      if (seg.h != th || seg.w != tw) {
        if (rule == ResizeRule::kNone) {
          ++out.skipped_mismatched;
          continue;
        }
        ImageU8 li(seg.h, seg.w, 1);
        for (int y = 0; y < seg.h; ++y)
          for (int x = 0; x < seg.w; ++x) li.at(y, x, 0) = static_cast<uint8_t>(seg.at(y, x));
        ImageU8 lr = resize_image(li, th, tw, /*nearest=*/true);
        seg = SegmentationMap(th, tw, num_labels);
        for (int y = 0; y < th; ++y)
          for (int x = 0; x < tw; ++x) seg.at(y, x) = lr.at(y, x, 0);
        validate(seg);
      }
    } else if (require_labels) {
      ++out.skipped_unpaired;
      continue;
    } else {
      seg = SegmentationMap(th, tw, num_labels);
    }

    out.items.push_back({std::move(img), std::move(seg), stem});
  }

  if (out.items.empty()) throw DataError("dataset is empty after ingestion: " + root);
  return out;
}

}  // namespace dsslic
