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

#ifndef DSSLIC_TRAINING_HPP_
#define DSSLIC_TRAINING_HPP_

// Joint training of CompNet, FineNet and the two-scale discriminators:
// one discriminator update then one generator update per batch, Adam
// (beta1 0.5), learning rate fixed then linearly decayed, and the
// perceptual terms dropped for the final epochs.

#include <string>
#include <vector>

#include "dsslic/config.hpp"
#include "dsslic/dataset.hpp"
#include "dsslic/losses.hpp"
#include "dsslic/networks.hpp"

namespace dsslic {

struct TrainingConfig {
  int epochs_total = 150;
  int epochs_lr_fixed = 100;
  int epochs_no_perceptual_tail = 50;
  double learning_rate = 0.0002;
  int batch_size = 2;
  int alpha = 8;
  double lambda = 10.0;
  std::string dataset_root;
  ResizeRule resize_rule = ResizeRule::kNone;
  int num_labels = 0;
  uint64_t seed = 0;
  Variant variant = Variant::kWithSeg;
  std::string out_dir;
  std::string resume;                  // checkpoint to continue from
  std::string extractor = "identity";  // identity | vgg
  std::string vgg_weights;
  int checkpoint_every = 1;

  static TrainingConfig from_config(const Config& c);
  void check() const;
};

// Base rate for the fixed phase, then a linear ramp to zero over the
// remaining epochs. Throws DataError outside [0, epochs_total).
double lr_schedule(int epoch, const TrainingConfig& cfg);

// True while the perceptual terms (feature-matching and VGG) stay in the
// generator objective; false for the final epochs_no_perceptual_tail epochs.
bool perceptual_schedule(int epoch, const TrainingConfig& cfg);

struct TrainResult {
  std::vector<LossReport> history;
  std::string weights_path;
  int epochs_run = 0;
};

class Trainer {
 public:
  Trainer(const TrainingConfig& cfg, NetworkBundle* nets, FeatureExtractor* extractor);

  // One alternating update on a batch; returns batch-averaged loss values.
  // Throws DataError if any loss goes non-finite.
  LossReport train_step(const std::vector<const DatasetItem*>& batch, const LossWeights& weights,
                        double lr);

  // Full schedule with per-epoch checkpoints and a loss-history CSV under
  // cfg.out_dir. Resumes from cfg.resume when set.
  TrainResult train(const std::vector<DatasetItem>& items);

  void save_checkpoint(const std::string& path, int next_epoch) const;
  int load_checkpoint(const std::string& path);

 private:
  TrainingConfig cfg_;
  NetworkBundle* nets_;
  FeatureExtractor* extractor_;
  Adam adam_g_, adam_d_;
};

// Validates that every item satisfies the trainer's input contract
// (dims divisible by alpha, min side >= 32, dims matching segmentation).
void check_trainable(const std::vector<DatasetItem>& items, const TrainingConfig& cfg);

}  // namespace dsslic

#endif  // DSSLIC_TRAINING_HPP_
