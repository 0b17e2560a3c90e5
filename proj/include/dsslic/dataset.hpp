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

#ifndef DSSLIC_DATASET_HPP_
#define DSSLIC_DATASET_HPP_

// Training-set ingestion. Layout on disk:
//
//   root/images/<stem>.(png|jpg|...)   the RGB images
//   root/labels/<stem>.png             8/16-bit single-channel label maps
//
// pairing is by filename stem. Items come back sorted by stem.

#include <string>
#include <vector>

#include "dsslic/image.hpp"

namespace dsslic {

// kCityscapes rescales everything to 512x1024. kAde20k keeps only images
// with at least 512 pixels in height or width and rescales them to 256x256.
// kNone uses files as-is.
enum class ResizeRule { kCityscapes, kAde20k, kNone };

ResizeRule parse_resize_rule(const std::string& name);
std::string resize_rule_name(ResizeRule r);

struct DatasetItem {
  ImageU8 image;
  SegmentationMap segmentation;
  std::string id;
};

struct IngestResult {
  std::vector<DatasetItem> items;
  int skipped_unpaired = 0;
  int skipped_filtered = 0;  // below the ADE20K size threshold
  int skipped_mismatched = 0;
};

// Throws DataError when no usable item is found. Label maps resize with
// nearest-neighbour sampling. With require_labels=false a missing label map
// becomes an all-zero field (noSeg training ignores it anyway).
IngestResult ingest_dataset(const std::string& root, ResizeRule rule, int num_labels,
                            bool require_labels = true);

}  // namespace dsslic

#endif  // DSSLIC_DATASET_HPP_
