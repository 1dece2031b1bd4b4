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

#ifndef SV_GMM_HPP_
#define SV_GMM_HPP_

#include <cstdint>
#include <vector>

#include "sv/types.hpp"

namespace sv {

// Diagonal-covariance Gaussian mixture; UBM or MAP-adapted speaker model.
struct GmmModel {
  Vector weights;    // K, nonnegative, sums to 1
  Matrix means;      // K x D
  Matrix variances;  // K x D, floored

  Eigen::Index num_components() const { return weights.size(); }
  Eigen::Index dim() const { return means.cols(); }
};

struct UbmTrainOptions {
  int num_components = 64;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double tolerance = 1e-5;            // per-frame log-likelihood gain
  double variance_floor_scale = 1e-3; // of the global per-dimension variance
};

struct MapConfig {
  double relevance_factor = 16.0;  // means-only adaptation
};

// Per-frame, per-component log densities (N x K), weights excluded.
Matrix log_component_densities(const GmmModel& gmm, const Matrix& frames);

// Per-frame log-likelihood log sum_k w_k N(x | k), log-sum-exp stabilized.
Vector log_likelihoods(const GmmModel& gmm, const Matrix& frames);

// Posterior responsibilities (N x K), rows sum to 1.
Matrix responsibilities(const GmmModel& gmm, const Matrix& frames);

// k-means++ seeded EM to convergence (per-frame log-likelihood gain below
// tolerance) or max_iterations. A degenerate component triggers one
// reseed before failing. ll_trace, when given, records the per-frame
// log-likelihood after every EM iteration.
GmmModel train_ubm(const Matrix& frames, const UbmTrainOptions& opts,
                   std::vector<double>* ll_trace = nullptr);

// Mean-only MAP adaptation: mean_k <- alpha_k E_k[x] + (1-alpha_k) mean_k
// with alpha_k = n_k / (n_k + r). Weights and variances copy from the UBM.
GmmModel map_adapt(const GmmModel& ubm, const Matrix& frames,
                   const MapConfig& cfg);

// Average per-frame log-likelihood ratio of speaker model to UBM.
double llr_score(const GmmModel& ubm, const GmmModel& speaker,
                 const Matrix& test_frames);

}  // namespace sv

#endif  // SV_GMM_HPP_
