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

#include "sv/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "sv/error.hpp"

namespace sv {

namespace {

constexpr char kLstmMagic[8] = {'S', 'V', 'L', 'S', 'T', 'M', '1', '\0'};
constexpr char kGmmMagic[8] = {'S', 'V', 'G', 'M', 'M', '1', '\0', '\0'};
constexpr char kFeatMagic[8] = {'S', 'V', 'F', 'E', 'A', 'T', '1', '\0'};
constexpr char kSpkMagic[8] = {'S', 'V', 'S', 'P', 'K', '1', '\0', '\0'};
constexpr char kSpkGmmMagic[8] = {'S', 'V', 'S', 'P', 'K', 'G', '1', '\0'};
constexpr std::uint32_t kLstmVersion = 1;

void write_bytes(std::ostream& out, const void* data, size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}
void read_bytes(std::istream& in, void* data, size_t n, const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  require(in.gcount() == static_cast<std::streamsize>(n), ErrorCode::IoError,
          "truncated file " + path);
}

template <typename T>
void write_pod(std::ostream& out, T v) {
  write_bytes(out, &v, sizeof(T));
}
template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  read_bytes(in, &v, sizeof(T), path);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}
std::string read_string(std::istream& in, const std::string& path) {
  const auto n = read_pod<std::uint32_t>(in, path);
  std::string s(n, '\0');
  read_bytes(in, s.data(), n, path);
  return s;
}

// Matrices travel row-major regardless of in-memory layout.
void write_matrix(std::ostream& out, const Matrix& m) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod<double>(out, m(r, c));
  }
}
Matrix read_matrix(std::istream& in, const std::string& path) {
  const auto rows = read_pod<std::uint32_t>(in, path);
  const auto cols = read_pod<std::uint32_t>(in, path);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = read_pod<double>(in, path);
    }
  }
  require(m.allFinite(), ErrorCode::MalformedHeader,
          "non-finite parameters in " + path);
  return m;
}

void write_vector(std::ostream& out, const Vector& v) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) write_pod<double>(out, v[i]);
}
Vector read_vector(std::istream& in, const std::string& path) {
  const auto n = read_pod<std::uint32_t>(in, path);
  Vector v(n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = read_pod<double>(in, path);
  require(v.allFinite(), ErrorCode::MalformedHeader,
          "non-finite parameters in " + path);
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoError, "cannot open " + path);
  return out;
}
std::ifstream open_in(const std::string& path, const char (&magic)[8]) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  char got[8];
  read_bytes(in, got, 8, path);
  require(std::memcmp(got, magic, 8) == 0, ErrorCode::MalformedHeader,
          "bad magic in " + path);
  return in;
}

}  // namespace

void save_lstm_checkpoint(const std::string& path, const SpeakerNet& net) {
  auto out = open_out(path);
  write_bytes(out, kLstmMagic, 8);
  write_pod<std::uint32_t>(out, kLstmVersion);
  write_pod<std::uint64_t>(out, net.feature_digest);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.lstm.config.input_dim));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.lstm.config.hidden_dim));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.lstm.config.num_layers));
  for (const auto& layer : net.lstm.layers) {
    write_matrix(out, layer.wx);
    write_matrix(out, layer.wh);
    write_vector(out, layer.b);
  }
  write_pod<std::uint8_t>(out, net.lstm.head ? 1 : 0);
  if (net.lstm.head) {
    write_matrix(out, net.lstm.head->w);
    write_vector(out, net.lstm.head->b);
  }
  write_pod<std::uint8_t>(out, net.input_norm ? 1 : 0);
  if (net.input_norm) {
    write_vector(out, net.input_norm->gamma);
    write_vector(out, net.input_norm->beta);
    write_vector(out, net.input_norm->running_mean);
    write_vector(out, net.input_norm->running_var);
    write_pod<double>(out, net.input_norm->momentum);
    write_pod<double>(out, net.input_norm->eps);
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

SpeakerNet load_lstm_checkpoint(const std::string& path) {
  auto in = open_in(path, kLstmMagic);
  const auto version = read_pod<std::uint32_t>(in, path);
  require(version == kLstmVersion, ErrorCode::MalformedHeader,
          "unsupported checkpoint version in " + path);

  SpeakerNet net;
  net.feature_digest = read_pod<std::uint64_t>(in, path);
  net.lstm.config.input_dim = static_cast<int>(read_pod<std::uint32_t>(in, path));
  net.lstm.config.hidden_dim = static_cast<int>(read_pod<std::uint32_t>(in, path));
  net.lstm.config.num_layers = static_cast<int>(read_pod<std::uint32_t>(in, path));
  net.lstm.config.validate();
  for (int l = 0; l < net.lstm.config.num_layers; ++l) {
    LstmLayer layer;
    layer.wx = read_matrix(in, path);
    layer.wh = read_matrix(in, path);
    layer.b = read_vector(in, path);
    net.lstm.layers.push_back(std::move(layer));
  }
  if (read_pod<std::uint8_t>(in, path)) {
    SoftmaxHead head;
    head.w = read_matrix(in, path);
    head.b = read_vector(in, path);
    net.lstm.head = std::move(head);
  }
  if (read_pod<std::uint8_t>(in, path)) {
    BatchNorm bn;
    bn.gamma = read_vector(in, path);
    bn.beta = read_vector(in, path);
    bn.running_mean = read_vector(in, path);
    bn.running_var = read_vector(in, path);
    bn.momentum = read_pod<double>(in, path);
    bn.eps = read_pod<double>(in, path);
    net.input_norm = std::move(bn);
  }
  return net;
}

void save_gmm_checkpoint(const std::string& path, const GmmModel& gmm,
                         std::uint64_t feature_digest) {
  auto out = open_out(path);
  write_bytes(out, kGmmMagic, 8);
  write_pod<std::uint64_t>(out, feature_digest);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(gmm.num_components()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(gmm.dim()));
  // Effective per-dimension floor is the smallest stored variance.
  Vector floors = gmm.variances.colwise().minCoeff();
  write_vector(out, floors);
  write_vector(out, gmm.weights);
  write_matrix(out, gmm.means);
  write_matrix(out, gmm.variances);
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

std::pair<GmmModel, std::uint64_t> load_gmm_checkpoint(const std::string& path) {
  auto in = open_in(path, kGmmMagic);
  const auto digest = read_pod<std::uint64_t>(in, path);
  const auto k = read_pod<std::uint32_t>(in, path);
  const auto d = read_pod<std::uint32_t>(in, path);
  read_vector(in, path);  // floors, informational
  GmmModel gmm;
  gmm.weights = read_vector(in, path);
  gmm.means = read_matrix(in, path);
  gmm.variances = read_matrix(in, path);
  require(gmm.num_components() == static_cast<Eigen::Index>(k) &&
              gmm.dim() == static_cast<Eigen::Index>(d),
          ErrorCode::MalformedHeader, "inconsistent mixture header in " + path);
  return {std::move(gmm), digest};
}

void save_feature_cache(const std::string& path, std::uint64_t digest,
                        const Matrix& features) {
  auto out = open_out(path);
  write_bytes(out, kFeatMagic, 8);
  write_pod<std::uint64_t>(out, digest);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(features.rows()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      write_pod<float>(out, static_cast<float>(features(r, c)));
    }
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

std::pair<Matrix, std::uint64_t> load_feature_cache(const std::string& path) {
  auto in = open_in(path, kFeatMagic);
  const auto digest = read_pod<std::uint64_t>(in, path);
  const auto rows = read_pod<std::uint32_t>(in, path);
  const auto cols = read_pod<std::uint32_t>(in, path);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = static_cast<double>(read_pod<float>(in, path));
    }
  }
  return {std::move(m), digest};
}

void save_speaker_models(const std::string& path,
                         const std::vector<SpeakerModel>& speakers,
                         std::uint64_t feature_digest) {
  auto out = open_out(path);
  write_bytes(out, kSpkMagic, 8);
  write_pod<std::uint64_t>(out, feature_digest);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(speakers.size()));
  for (const auto& s : speakers) {
    write_string(out, s.speaker_id);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.num_enroll_utterances));
    write_vector(out, s.dvector);
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

std::pair<std::vector<SpeakerModel>, std::uint64_t> load_speaker_models(
    const std::string& path) {
  auto in = open_in(path, kSpkMagic);
  const auto digest = read_pod<std::uint64_t>(in, path);
  const auto n = read_pod<std::uint32_t>(in, path);
  std::vector<SpeakerModel> speakers;
  speakers.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    SpeakerModel s;
    s.speaker_id = read_string(in, path);
    s.num_enroll_utterances = static_cast<int>(read_pod<std::uint32_t>(in, path));
    s.dvector = read_vector(in, path);
    speakers.push_back(std::move(s));
  }
  return {std::move(speakers), digest};
}

void save_gmm_speakers(
    const std::string& path,
    const std::vector<std::pair<std::string, GmmModel>>& speakers,
    std::uint64_t feature_digest) {
  auto out = open_out(path);
  write_bytes(out, kSpkGmmMagic, 8);
  write_pod<std::uint64_t>(out, feature_digest);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(speakers.size()));
  for (const auto& [id, gmm] : speakers) {
    write_string(out, id);
    write_vector(out, gmm.weights);
    write_matrix(out, gmm.means);
    write_matrix(out, gmm.variances);
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

std::pair<std::vector<std::pair<std::string, GmmModel>>, std::uint64_t>
load_gmm_speakers(const std::string& path) {
  auto in = open_in(path, kSpkGmmMagic);
  const auto digest = read_pod<std::uint64_t>(in, path);
  const auto n = read_pod<std::uint32_t>(in, path);
  std::vector<std::pair<std::string, GmmModel>> speakers;
  speakers.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string id = read_string(in, path);
    GmmModel gmm;
    gmm.weights = read_vector(in, path);
    gmm.means = read_matrix(in, path);
    gmm.variances = read_matrix(in, path);
    speakers.emplace_back(std::move(id), std::move(gmm));
  }
  return {std::move(speakers), digest};
}

}  // namespace sv
