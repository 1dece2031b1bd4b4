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

#ifndef SV_FEATURES_HPP_
#define SV_FEATURES_HPP_

#include <cstdint>

#include "sv/types.hpp"
#include "sv/vad.hpp"

namespace sv {

enum class FeatureMode { kLogFilterbank, kMfcc };

struct FeatureConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;  // 60% window overlap
  int num_filters = 40;
  int num_ceps = 40;  // mfcc mode only
  int fft_size = 512;
  FeatureMode mode = FeatureMode::kLogFilterbank;
  double log_floor = 1e-10;

  int window_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  // Output columns for the active mode.
  int num_coeffs() const {
    return mode == FeatureMode::kMfcc ? num_ceps : num_filters;
  }
  void validate(int sample_rate) const;
};

// Frames at hop stride with a Hamming window; the tail is zero-padded so
// that num_frames = ceil(len / hop). One row per frame.
Matrix frame_signal(const Waveform& w, const FeatureConfig& cfg);

// Triangular mel filter weights, rows = filters, cols = fft_size/2 + 1 bins.
// Centers are mel-spaced between 0 Hz and Nyquist.
Matrix mel_filterbank(int num_filters, int fft_size, int sample_rate);

// Natural-log mel filterbank energies, floored at cfg.log_floor.
Matrix log_mel_energies(const Matrix& frames, const FeatureConfig& cfg,
                        int sample_rate);

// Orthonormal DCT-II of the log mel energies, first num_ceps coefficients.
Matrix mfcc(const Matrix& frames, const FeatureConfig& cfg, int sample_rate);

// Per-column mean/variance normalization (population std). Columns with
// std below 1e-12 are mean-subtracted only.
Matrix normalize_features(const Matrix& m);

// Un-normalized features of the whole waveform in the configured mode.
Matrix compute_features(const Waveform& w, const FeatureConfig& cfg);

// Normalized features of the first duration_s seconds; with defaults a
// 1-second window is exactly 100 x 40.
FeatureWindow extract_window(const Waveform& w, const FeatureConfig& cfg,
                             double duration_s);

// Digest binding checkpoints and caches to the front-end settings.
std::uint64_t feature_digest(const FeatureConfig& cfg, const VadConfig& vad,
                             int sample_rate);

}  // namespace sv

#endif  // SV_FEATURES_HPP_
