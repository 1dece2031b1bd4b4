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

#include "sv/vad.hpp"

#include <cmath>

#include "sv/error.hpp"

namespace sv {

std::vector<bool> vad_frame_decisions(const Waveform& w,
                                      const VadConfig& cfg) {
  require(cfg.threshold_db > 0, ErrorCode::BadConfig,
          "VAD threshold must be positive");
  require(w.samples.size() > 0, ErrorCode::EmptyAudio, "empty waveform");

  const Eigen::Index win =
      static_cast<Eigen::Index>(std::lround(cfg.window_ms * w.sample_rate / 1000.0));
  const Eigen::Index hop =
      static_cast<Eigen::Index>(std::lround(cfg.hop_ms * w.sample_rate / 1000.0));
  require(win > 0 && hop > 0 && hop < win, ErrorCode::BadConfig,
          "bad VAD frame geometry");

  const Eigen::Index len = w.samples.size();
  const Eigen::Index num_frames = (len + hop - 1) / hop;

  Vector energy(num_frames);
  for (Eigen::Index i = 0; i < num_frames; ++i) {
    const Eigen::Index start = i * hop;
    const Eigen::Index n = std::min(win, len - start);
    energy[i] = w.samples.segment(start, n).squaredNorm() / n;
  }

  const double max_energy = energy.maxCoeff();
  std::vector<bool> keep(static_cast<size_t>(num_frames), false);
  if (max_energy <= 0.0) return keep;  // pure silence, nothing survives

  const double floor = max_energy * std::pow(10.0, -cfg.threshold_db / 10.0);
  for (Eigen::Index i = 0; i < num_frames; ++i) {
    keep[static_cast<size_t>(i)] = energy[i] >= floor;
  }
  return keep;
}

namespace {

// One pass of the energy gate: union of surviving frame spans, in order.
Waveform vad_pass(const Waveform& w, const VadConfig& cfg) {
  const std::vector<bool> keep = vad_frame_decisions(w, cfg);

  const Eigen::Index win =
      static_cast<Eigen::Index>(std::lround(cfg.window_ms * w.sample_rate / 1000.0));
  const Eigen::Index hop =
      static_cast<Eigen::Index>(std::lround(cfg.hop_ms * w.sample_rate / 1000.0));
  const Eigen::Index len = w.samples.size();

  Waveform out;
  out.sample_rate = w.sample_rate;
  std::vector<double> kept;
  kept.reserve(static_cast<size_t>(len));
  Eigen::Index emitted_to = 0;  // overlapping frames share samples
  for (size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    const Eigen::Index start = static_cast<Eigen::Index>(i) * hop;
    const Eigen::Index stop = std::min(start + win, len);
    const Eigen::Index from = std::max(start, emitted_to);
    for (Eigen::Index s = from; s < stop; ++s) kept.push_back(w.samples[s]);
    emitted_to = std::max(emitted_to, stop);
  }
  require(!kept.empty(), ErrorCode::AllSilent,
          "no frame passed the VAD energy gate");

  out.samples = Eigen::Map<const Vector>(kept.data(),
                                         static_cast<Eigen::Index>(kept.size()));
  return out;
}

}  // namespace

Waveform apply_vad(const Waveform& w, const VadConfig& cfg) {
  // Removing frames shifts the framing grid of what remains, so one pass
  // is not a fixpoint of itself: joins can expose new sub-threshold
  // slivers. Iterate until stable; each extra pass strictly shrinks the
  // signal, so this terminates.
  Waveform current = vad_pass(w, cfg);
  while (true) {
    Waveform next = vad_pass(current, cfg);
    if (next.samples.size() == current.samples.size()) return current;
    current = std::move(next);
  }
}

}  // namespace sv
