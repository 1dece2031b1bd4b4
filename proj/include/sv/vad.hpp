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

#ifndef SV_VAD_HPP_
#define SV_VAD_HPP_

#include <vector>

#include "sv/types.hpp"

namespace sv {

/// Energy-gate VAD settings. Frame geometry matches feature extraction.
struct VadConfig {
  double threshold_db = 30.0;
  double window_ms = 25.0;
  double hop_ms = 10.0;
};

// Per-frame keep/drop decisions. A frame starts every hop_ms and is kept
// when its mean-square energy is within threshold_db of the loudest frame.
// The final frame may be shorter than window_ms; energies are per-sample
// means so short frames are not penalized.
std::vector<bool> vad_frame_decisions(const Waveform& w, const VadConfig& cfg);

// Removes frames more than threshold_db below the utterance's maximum
// frame energy; the samples covered by surviving frames are concatenated
// in order. Throws AllSilent when nothing survives.
Waveform apply_vad(const Waveform& w, const VadConfig& cfg);

}  // namespace sv

#endif  // SV_VAD_HPP_
