// Copyright (c) 2026 svkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SV_TRAINING_HPP_
#define SV_TRAINING_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sv/features.hpp"
#include "sv/losses.hpp"
#include "sv/speaker_net.hpp"
#include "sv/types.hpp"

namespace sv {

enum class TrainPhase { kPretrain, kFinetune };

const char* phase_name(TrainPhase phase);

struct TrainConfig {
  TrainPhase phase = TrainPhase::kPretrain;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 16;
  int epochs = 20;
  std::uint64_t seed = 0;
  double crop_duration_s = 1.0;
  bool pair_selection = true;
  double th0 = 1.0;  // pair-selection base threshold
  bool batchnorm = true;
  ContrastiveConfig contrastive;
  int frames_per_second = 100;  // 1000 / hop_ms

  int crop_frames() const {
    return static_cast<int>(std::lround(crop_duration_s * frames_per_second));
  }
  void validate() const;
};

// One development utterance: speaker row index plus the un-normalized
// feature matrix of the whole post-VAD utterance.
struct DevUtterance {
  int speaker = 0;
  Matrix features;
};

// Uniformly random contiguous crop_frames-row slice, then per-window
// mean/variance normalization.
Matrix random_crop(const Matrix& utterance_features, int crop_frames,
                   std::mt19937_64& rng);

// Waveform-level variant: a hop-aligned random offset followed by
// extract_window on the cropped signal.
FeatureWindow random_crop(const Waveform& w, const FeatureConfig& cfg,
                          double duration_s, std::mt19937_64& rng);

// Candidate pairs over an epoch's crop windows, with distances from the
// frozen model.
struct PairPool {
  std::vector<PairRef> pairs;
  std::vector<double> distances;
};

struct PairSelection {
  std::vector<int> kept;  // indices into pool.pairs, order preserved
  double threshold = 0.0;  // max_gen + th
  double max_genuine = 0.0;
  double min_genuine = 0.0;
  double discard_rate = 0.0;  // fraction of impostor pairs discarded
};

// Distance-threshold impostor filter: th = th0 * |max_gen / min_gen|
// (epsilon-guarded), impostor pairs with D > max_gen + th are discarded,
// genuine pairs always kept.
PairSelection select_pairs(const PairPool& pool, double th0);

struct EpochLog {
  int epoch = 0;
  TrainPhase phase = TrainPhase::kPretrain;
  double loss = 0.0;
  double genuine_mean_distance = std::nan("");
  double impostor_mean_distance = std::nan("");
  double discard_rate = std::nan("");
};

void write_train_log(const std::string& path,
                     const std::vector<EpochLog>& log);

// Minibatch SGD with momentum over flat parameter views.
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate, double momentum)
      : learning_rate_(learning_rate), momentum_(momentum) {}

  void step(std::vector<Eigen::Map<Vector>> params,
            std::vector<Eigen::Map<Vector>> grads);

 private:
  double learning_rate_;
  double momentum_;
  std::vector<Vector> velocity_;
};

// Softmax pretraining: one random crop per dev utterance per epoch,
// shuffled minibatches, cross-entropy on the head. Attaches a head sized
// to num_speakers when the model has none. Deterministic under cfg.seed.
std::vector<EpochLog> pretrain(SpeakerNet& net,
                               const std::vector<DevUtterance>& dev,
                               int num_speakers, const TrainConfig& cfg);

// Siamese fine-tuning: per epoch, crops -> pair pool (all genuine pairs
// plus an equal number of sampled impostor pairs) -> optional Algorithm-1
// filter -> contrastive SGD. Drops the softmax head from the model.
std::vector<EpochLog> finetune(SpeakerNet& net,
                               const std::vector<DevUtterance>& dev,
                               const TrainConfig& cfg);

}  // namespace sv

#endif  // SV_TRAINING_HPP_
