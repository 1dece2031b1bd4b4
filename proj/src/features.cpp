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

#include "sv/features.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sv/error.hpp"

namespace sv {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Vector hamming(Eigen::Index n) {
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / static_cast<double>(n - 1));
  }
  return w;
}

// Magnitude-squared spectrum of each row, bins 0..fft_size/2.
Matrix power_spectrum(const Matrix& frames, int fft_size) {
  const Eigen::Index num_bins = fft_size / 2 + 1;
  Matrix power(frames.rows(), num_bins);
  Eigen::FFT<double> fft;
  std::vector<double> time(static_cast<size_t>(fft_size), 0.0);
  std::vector<std::complex<double>> freq;
  for (Eigen::Index r = 0; r < frames.rows(); ++r) {
    for (Eigen::Index c = 0; c < frames.cols(); ++c) {
      time[static_cast<size_t>(c)] = frames(r, c);
    }
    fft.fwd(freq, time);
    for (Eigen::Index b = 0; b < num_bins; ++b) {
      power(r, b) = std::norm(freq[static_cast<size_t>(b)]);
    }
  }
  return power;
}

}  // namespace

int FeatureConfig::window_samples(int sample_rate) const {
  return static_cast<int>(std::lround(window_ms * sample_rate / 1000.0));
}

int FeatureConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FeatureConfig::validate(int sample_rate) const {
  require(sample_rate > 0, ErrorCode::BadConfig, "sample rate must be positive");
  require(hop_ms > 0 && hop_ms < window_ms, ErrorCode::BadConfig,
          "hop must be positive and shorter than the window");
  require(num_filters > 0, ErrorCode::BadConfig, "need at least one filter");
  require(mode != FeatureMode::kMfcc || (num_ceps > 0 && num_ceps <= num_filters),
          ErrorCode::BadConfig, "num_ceps must be in [1, num_filters]");
  require(fft_size > 0 && (fft_size & (fft_size - 1)) == 0,
          ErrorCode::BadConfig, "fft_size must be a power of two");
  require(fft_size >= window_samples(sample_rate), ErrorCode::BadConfig,
          "fft_size smaller than the window");
  require(log_floor > 0, ErrorCode::BadConfig, "log_floor must be positive");
}

Matrix frame_signal(const Waveform& w, const FeatureConfig& cfg) {
  cfg.validate(w.sample_rate);
  const Eigen::Index win = cfg.window_samples(w.sample_rate);
  const Eigen::Index hop = cfg.hop_samples(w.sample_rate);
  const Eigen::Index len = w.samples.size();
  require(len >= hop, ErrorCode::SignalTooShort,
          "signal shorter than one hop");

  const Eigen::Index num_frames = (len + hop - 1) / hop;
  const Vector window = hamming(win);

  Matrix frames = Matrix::Zero(num_frames, win);
  for (Eigen::Index i = 0; i < num_frames; ++i) {
    const Eigen::Index start = i * hop;
    const Eigen::Index n = std::min(win, len - start);
    frames.row(i).head(n) = w.samples.segment(start, n);
    frames.row(i).array() *= window.transpose().array();
  }
  return frames;
}

Matrix mel_filterbank(int num_filters, int fft_size, int sample_rate) {
  const double nyquist = sample_rate / 2.0;
  const Eigen::Index num_bins = fft_size / 2 + 1;

  // num_filters + 2 mel-spaced edge frequencies from 0 Hz to Nyquist.
  Vector edges(num_filters + 2);
  const double mel_max = hz_to_mel(nyquist);
  for (Eigen::Index k = 0; k < edges.size(); ++k) {
    edges[k] = mel_to_hz(mel_max * k / static_cast<double>(num_filters + 1));
  }

  Matrix fb = Matrix::Zero(num_filters, num_bins);
  for (int k = 0; k < num_filters; ++k) {
    const double lo = edges[k], center = edges[k + 1], hi = edges[k + 2];
    for (Eigen::Index b = 0; b < num_bins; ++b) {
      const double f = b * static_cast<double>(sample_rate) / fft_size;
      double weight = 0.0;
      if (f >= lo && f <= center) {
        weight = (f - lo) / (center - lo);
      } else if (f > center && f <= hi) {
        weight = (hi - f) / (hi - center);
      }
      fb(k, b) = weight;
    }
  }
  return fb;
}

Matrix log_mel_energies(const Matrix& frames, const FeatureConfig& cfg,
                        int sample_rate) {
  cfg.validate(sample_rate);
  const Matrix power = power_spectrum(frames, cfg.fft_size);
  const Matrix fb = mel_filterbank(cfg.num_filters, cfg.fft_size, sample_rate);
  Matrix energies = power * fb.transpose();
  return energies.array().max(cfg.log_floor).log().matrix();
}

Matrix mfcc(const Matrix& frames, const FeatureConfig& cfg, int sample_rate) {
  require(cfg.mode == FeatureMode::kMfcc, ErrorCode::BadConfig,
          "mfcc() requires mfcc mode");
  const Matrix logmel = log_mel_energies(frames, cfg, sample_rate);

  const int n = cfg.num_filters;
  Matrix dct(cfg.num_ceps, n);
  for (int i = 0; i < cfg.num_ceps; ++i) {
    const double scale = i == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int j = 0; j < n; ++j) {
      dct(i, j) = scale * std::cos(M_PI * i * (j + 0.5) / n);
    }
  }
  return logmel * dct.transpose();
}

Matrix normalize_features(const Matrix& m) {
  require(m.rows() >= 2, ErrorCode::TooFewFrames,
          "normalization needs at least 2 frames");
  const Eigen::Index n = m.rows();
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double mean = m.col(c).mean();
    Vector centered = m.col(c).array() - mean;
    const double std_dev = std::sqrt(centered.squaredNorm() / n);
    out.col(c) = std_dev < 1e-12 ? centered : centered / std_dev;
  }
  return out;
}

Matrix compute_features(const Waveform& w, const FeatureConfig& cfg) {
  const Matrix frames = frame_signal(w, cfg);
  return cfg.mode == FeatureMode::kMfcc
             ? mfcc(frames, cfg, w.sample_rate)
             : log_mel_energies(frames, cfg, w.sample_rate);
}

FeatureWindow extract_window(const Waveform& w, const FeatureConfig& cfg,
                             double duration_s) {
  cfg.validate(w.sample_rate);
  require(duration_s > 0, ErrorCode::BadConfig, "duration must be positive");
  const auto wanted =
      static_cast<Eigen::Index>(std::lround(duration_s * w.sample_rate));
  require(w.samples.size() >= wanted, ErrorCode::UtteranceTooShort,
          "utterance shorter than the requested window");

  Waveform head;
  head.sample_rate = w.sample_rate;
  head.samples = w.samples.head(wanted);

  FeatureWindow window;
  window.values = normalize_features(compute_features(head, cfg));
  window.duration_s = duration_s;
  return window;
}

std::uint64_t feature_digest(const FeatureConfig& cfg, const VadConfig& vad,
                             int sample_rate) {
  std::ostringstream canon;
  canon << "win=" << cfg.window_ms << ";hop=" << cfg.hop_ms
        << ";nf=" << cfg.num_filters << ";nc=" << cfg.num_ceps
        << ";fft=" << cfg.fft_size
        << ";mode=" << (cfg.mode == FeatureMode::kMfcc ? "mfcc" : "fbank")
        << ";floor=" << cfg.log_floor << ";vad=" << vad.threshold_db
        << ";sr=" << sample_rate;
  // FNV-1a
  std::uint64_t h = 14695981039346656037ull;
  for (char c : canon.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sv
