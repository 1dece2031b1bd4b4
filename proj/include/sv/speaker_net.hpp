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

#ifndef SV_SPEAKER_NET_HPP_
#define SV_SPEAKER_NET_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "sv/batchnorm.hpp"
#include "sv/lstm.hpp"
#include "sv/types.hpp"

namespace sv {

// The complete verification network: optional input batch norm feeding
// the stacked LSTM. This is what checkpoints persist.
struct SpeakerNet {
  LstmModel lstm;
  std::optional<BatchNorm> input_norm;
  std::uint64_t feature_digest = 0;
};

// Inference-path embedding: running-statistics batch norm (when present)
// followed by the recurrence; returns the top layer's last hidden state.
Vector embed(const SpeakerNet& net, const Matrix& window);
inline Vector embed(const SpeakerNet& net, const FeatureWindow& window) {
  return embed(net, window.values);
}

// Batched inference-path embeddings, one row per window.
Matrix embed_batch(const SpeakerNet& net, const std::vector<Matrix>& windows);

}  // namespace sv

#endif  // SV_SPEAKER_NET_HPP_
