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

#include <random>
#include <vector>

#include "doctest.h"
#include "support/test_util.hpp"
#include "sv/error.hpp"

namespace {

// Speech-like fixture: sine bursts of varying level separated by silence.
sv::Waveform burst_signal(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> segments(2, 5);
  std::uniform_real_distribution<double> amp(0.2, 0.9);
  std::uniform_real_distribution<double> freq(200.0, 2000.0);
  std::uniform_real_distribution<double> dur(0.1, 0.4);
  std::bernoulli_distribution silent(0.4);

  sv::Waveform w = svtest::make_sine(freq(rng), dur(rng), 16000, amp(rng));
  const int n = segments(rng);
  for (int i = 0; i < n; ++i) {
    const sv::Waveform next =
        silent(rng) ? svtest::make_silence(dur(rng))
                    : svtest::make_sine(freq(rng), dur(rng), 16000, amp(rng));
    w = svtest::concat(w, next);
  }
  return w;
}

}  // namespace

TEST_CASE("apply_vad rejects pure silence") {
  const sv::Waveform w = svtest::make_silence(1.0);
  try {
    sv::apply_vad(w, sv::VadConfig{});
    FAIL("expected AllSilent");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::AllSilent);
  }
}

TEST_CASE("apply_vad keeps a constant-level sine intact") {
  const sv::Waveform w = svtest::make_sine(440.0, 1.0);
  const sv::Waveform out = sv::apply_vad(w, sv::VadConfig{});
  CHECK(out.samples.size() == w.samples.size());
  CHECK(out.samples == w.samples);
}

TEST_CASE("apply_vad drops the silent half of a sine-then-silence signal") {
  const sv::Waveform w =
      svtest::concat(svtest::make_sine(500.0, 0.5), svtest::make_silence(0.5));
  const sv::VadConfig cfg{};  // 30 dB

  // Independent per-frame energy computation.
  const Eigen::Index win = 400, hop = 160, len = w.samples.size();
  const Eigen::Index num_frames = (len + hop - 1) / hop;
  std::vector<double> energy(static_cast<size_t>(num_frames));
  double max_energy = 0.0;
  for (Eigen::Index i = 0; i < num_frames; ++i) {
    const Eigen::Index n = std::min(win, len - i * hop);
    double e = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
      e += w.samples[i * hop + s] * w.samples[i * hop + s];
    }
    energy[static_cast<size_t>(i)] = e / n;
    max_energy = std::max(max_energy, energy[static_cast<size_t>(i)]);
  }
  std::vector<bool> expected;
  for (double e : energy) expected.push_back(e >= max_energy * 1e-3);

  CHECK(sv::vad_frame_decisions(w, cfg) == expected);

  // The surviving region is the prefix covered by kept frames.
  Eigen::Index last_kept = -1;
  for (size_t i = 0; i < expected.size(); ++i) {
    if (expected[i]) last_kept = static_cast<Eigen::Index>(i);
  }
  const Eigen::Index expected_len =
      std::min(len, last_kept * hop + win);
  const sv::Waveform out = sv::apply_vad(w, cfg);
  CHECK(out.samples.size() == expected_len);
  CHECK(out.samples == w.samples.head(expected_len));
}

TEST_CASE("VAD is idempotent and never adds samples") {
  std::mt19937_64 rng(7);
  const sv::VadConfig cfg{};
  for (int trial = 0; trial < 25; ++trial) {
    const sv::Waveform w = burst_signal(rng);
    sv::Waveform once;
    try {
      once = sv::apply_vad(w, cfg);
    } catch (const sv::Error& e) {
      REQUIRE(e.code() == sv::ErrorCode::AllSilent);
      continue;
    }
    CHECK(once.samples.size() <= w.samples.size());
    const sv::Waveform twice = sv::apply_vad(once, cfg);
    REQUIRE(twice.samples.size() == once.samples.size());
    CHECK(twice.samples == once.samples);
  }
}
