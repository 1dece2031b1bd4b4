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

#ifndef SV_TYPES_HPP_
#define SV_TYPES_HPP_

#include <Eigen/Dense>

namespace sv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;

/// Mono audio signal, samples normalized to [-1, 1].
struct Waveform {
  Vector samples;
  int sample_rate = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

/// Feature matrix, one row per frame, one column per coefficient.
struct FeatureWindow {
  Matrix values;  // num_frames x num_coeffs
  double duration_s = 0.0;

  Eigen::Index num_frames() const { return values.rows(); }
  Eigen::Index num_coeffs() const { return values.cols(); }
};

}  // namespace sv

#endif  // SV_TYPES_HPP_
