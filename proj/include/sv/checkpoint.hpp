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

#ifndef SV_CHECKPOINT_HPP_
#define SV_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sv/eval.hpp"
#include "sv/gmm.hpp"
#include "sv/speaker_net.hpp"
#include "sv/types.hpp"

namespace sv {

// All files are little-endian binary with an 8-byte magic. Parameters are
// stored as 64-bit floats; feature caches as 32-bit floats.

// "SVLSTM1": version, feature digest, LstmConfig, per-layer weights and
// biases, optional softmax head, optional input batch norm.
void save_lstm_checkpoint(const std::string& path, const SpeakerNet& net);
SpeakerNet load_lstm_checkpoint(const std::string& path);

// "SVGMM1": feature digest, K, D, per-dimension variance floors, then
// weights, means, variances.
void save_gmm_checkpoint(const std::string& path, const GmmModel& gmm,
                         std::uint64_t feature_digest);
std::pair<GmmModel, std::uint64_t> load_gmm_checkpoint(
    const std::string& path);

// "SVFEAT1": feature digest, rows, cols, row-major float32 values.
void save_feature_cache(const std::string& path, std::uint64_t digest,
                        const Matrix& features);
std::pair<Matrix, std::uint64_t> load_feature_cache(const std::string& path);

// "SVSPK1": enrolled d-vectors.
void save_speaker_models(const std::string& path,
                         const std::vector<SpeakerModel>& speakers,
                         std::uint64_t feature_digest);
std::pair<std::vector<SpeakerModel>, std::uint64_t> load_speaker_models(
    const std::string& path);

// "SVSPKG1": MAP-adapted per-speaker mixtures.
void save_gmm_speakers(
    const std::string& path,
    const std::vector<std::pair<std::string, GmmModel>>& speakers,
    std::uint64_t feature_digest);
std::pair<std::vector<std::pair<std::string, GmmModel>>, std::uint64_t>
load_gmm_speakers(const std::string& path);

}  // namespace sv

#endif  // SV_CHECKPOINT_HPP_
