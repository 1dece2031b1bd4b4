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

#include "sv/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "sv/error.hpp"

namespace sv {

namespace {

constexpr uint16_t kFormatPcm = 0x1;

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | b[1] << 8);
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8 & 0xff),
               static_cast<char>(v >> 16 & 0xff),
               static_cast<char>(v >> 24 & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8 & 0xff)};
  out.write(b, 2);
}

}  // namespace

Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  uint32_t riff_size = read_u32(in);
  (void)riff_size;
  in.read(wave, 4);
  require(in.good() && std::memcmp(riff, "RIFF", 4) == 0 &&
              std::memcmp(wave, "WAVE", 4) == 0,
          ErrorCode::MalformedHeader, "not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<int16_t> pcm;
  bool have_data = false;

  // Walk chunks; fmt must precede data.
  while (in) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    uint32_t size = read_u32(in);
    require(in.good(), ErrorCode::MalformedHeader,
            "truncated chunk header in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      require(size >= 16, ErrorCode::MalformedHeader,
              "fmt chunk too small in " + path);
      format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      in.ignore(size - 16 + (size & 1));
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      require(have_fmt, ErrorCode::MalformedHeader,
              "data chunk before fmt in " + path);
      require(format == kFormatPcm, ErrorCode::UnsupportedEncoding,
              "non-PCM encoding in " + path);
      require(channels == 1, ErrorCode::UnsupportedEncoding,
              "expected mono audio in " + path);
      require(bits == 16, ErrorCode::UnsupportedEncoding,
              "expected 16-bit samples in " + path);
      require(size % 2 == 0, ErrorCode::MalformedHeader,
              "odd data chunk size in " + path);
      pcm.resize(size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()),
              static_cast<std::streamsize>(size));
      require(in.good() || in.eof(), ErrorCode::MalformedHeader,
              "truncated data chunk in " + path);
      require(in.gcount() == static_cast<std::streamsize>(size),
              ErrorCode::MalformedHeader, "truncated data chunk in " + path);
      have_data = true;
      break;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  require(have_fmt && have_data, ErrorCode::MalformedHeader,
          "missing fmt or data chunk in " + path);
  require(!pcm.empty(), ErrorCode::EmptyAudio, "no samples in " + path);
  require(sample_rate > 0, ErrorCode::MalformedHeader,
          "zero sample rate in " + path);

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  w.samples.resize(static_cast<Eigen::Index>(pcm.size()));
  for (size_t i = 0; i < pcm.size(); ++i) {
    w.samples[static_cast<Eigen::Index>(i)] = pcm[i] / 32768.0;
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  require(w.samples.size() > 0, ErrorCode::EmptyAudio, "nothing to write");
  require(w.sample_rate > 0, ErrorCode::BadConfig, "sample rate not set");

  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path);

  const uint32_t num_samples = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_size = num_samples * 2;
  const uint32_t rate = static_cast<uint32_t>(w.sample_rate);

  out.write("RIFF", 4);
  write_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, kFormatPcm);
  write_u16(out, 1);  // mono
  write_u32(out, rate);
  write_u32(out, rate * 2);  // byte rate
  write_u16(out, 2);         // block align
  write_u16(out, 16);        // bits
  out.write("data", 4);
  write_u32(out, data_size);

  for (Eigen::Index i = 0; i < w.samples.size(); ++i) {
    double v = std::round(w.samples[i] * 32768.0);
    v = std::clamp(v, -32768.0, 32767.0);
    write_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

}  // namespace sv
