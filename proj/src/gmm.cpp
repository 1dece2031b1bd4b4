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

#include "sv/gmm.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sv/error.hpp"

namespace sv {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void check_model(const GmmModel& gmm) {
  require(gmm.weights.size() > 0 && gmm.means.rows() == gmm.weights.size() &&
              gmm.variances.rows() == gmm.weights.size() &&
              gmm.variances.cols() == gmm.means.cols(),
          ErrorCode::ShapeMismatch, "inconsistent mixture shapes");
}

// Rowwise log-sum-exp of log w_k + log N(x|k).
Vector weighted_lse(const GmmModel& gmm, const Matrix& log_dens) {
  const Vector log_w = gmm.weights.array().max(1e-300).log();
  Vector out(log_dens.rows());
  for (Eigen::Index r = 0; r < log_dens.rows(); ++r) {
    const Eigen::RowVectorXd terms =
        log_dens.row(r) + log_w.transpose();
    const double mx = terms.maxCoeff();
    out[r] = mx + std::log((terms.array() - mx).exp().sum());
  }
  return out;
}

struct EStep {
  Matrix resp;     // N x K
  double mean_ll;  // per-frame log-likelihood
};

EStep e_step(const GmmModel& gmm, const Matrix& frames) {
  const Matrix log_dens = log_component_densities(gmm, frames);
  const Vector log_w = gmm.weights.array().max(1e-300).log();
  EStep out;
  out.resp.resize(frames.rows(), gmm.num_components());
  double ll_sum = 0.0;
  for (Eigen::Index r = 0; r < frames.rows(); ++r) {
    const Eigen::RowVectorXd terms = log_dens.row(r) + log_w.transpose();
    const double mx = terms.maxCoeff();
    const Eigen::RowVectorXd shifted = (terms.array() - mx).exp();
    const double total = shifted.sum();
    out.resp.row(r) = shifted / total;
    ll_sum += mx + std::log(total);
  }
  out.mean_ll = ll_sum / frames.rows();
  return out;
}

// k-means++ centers: first uniform, then squared-distance weighted.
Matrix kmeanspp_centers(const Matrix& frames, int k, std::mt19937_64& rng) {
  const Eigen::Index n = frames.rows();
  Matrix centers(k, frames.cols());
  std::uniform_int_distribution<Eigen::Index> uniform(0, n - 1);
  centers.row(0) = frames.row(uniform(rng));

  Vector best_d2 =
      (frames.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = best_d2.sum();
    Eigen::Index chosen;
    if (total <= 0.0) {
      chosen = uniform(rng);
    } else {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      double target = unit(rng) * total;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= best_d2[i];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = frames.row(chosen);
    best_d2 = best_d2.cwiseMin(
        (frames.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Matrix log_component_densities(const GmmModel& gmm, const Matrix& frames) {
  check_model(gmm);
  require(frames.cols() == gmm.dim(), ErrorCode::ShapeMismatch,
          "frame dimension does not match the mixture");
  const Eigen::Index k = gmm.num_components();
  Matrix out(frames.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::RowVectorXd inv_var =
        gmm.variances.row(c).array().inverse();
    const double log_norm =
        -0.5 * (gmm.dim() * kLogTwoPi +
                gmm.variances.row(c).array().log().sum());
    const Matrix centered = frames.rowwise() - gmm.means.row(c);
    out.col(c) =
        (centered.array().square().rowwise() * inv_var.array())
            .rowwise()
            .sum()
            .matrix() *
        -0.5;
    out.col(c).array() += log_norm;
  }
  return out;
}

Vector log_likelihoods(const GmmModel& gmm, const Matrix& frames) {
  return weighted_lse(gmm, log_component_densities(gmm, frames));
}

Matrix responsibilities(const GmmModel& gmm, const Matrix& frames) {
  return e_step(gmm, frames).resp;
}

GmmModel train_ubm(const Matrix& frames, const UbmTrainOptions& opts,
                   std::vector<double>* ll_trace) {
  const Eigen::Index n = frames.rows();
  const Eigen::Index d = frames.cols();
  const int k = opts.num_components;
  require(k >= 1, ErrorCode::BadConfig, "need at least one component");
  require(n >= 10 * static_cast<Eigen::Index>(k), ErrorCode::TooFewFrames,
          "need at least 10 frames per component");

  const Eigen::RowVectorXd global_mean = frames.colwise().mean();
  const Eigen::RowVectorXd global_var =
      (frames.rowwise() - global_mean).array().square().colwise().sum() / n;
  const Eigen::RowVectorXd var_floor =
      (global_var * opts.variance_floor_scale).array().max(1e-10);

  for (int attempt = 0; attempt < 2; ++attempt) {
    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(attempt));
    GmmModel gmm;
    gmm.weights = Vector::Constant(k, 1.0 / k);
    gmm.means = kmeanspp_centers(frames, k, rng);
    gmm.variances = global_var.replicate(k, 1).cwiseMax(var_floor.replicate(k, 1));

    if (ll_trace) ll_trace->clear();
    bool degenerate = false;
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      const EStep e = e_step(gmm, frames);
      const Vector counts = e.resp.colwise().sum();
      if (counts.minCoeff() < 1e-9 || !e.resp.allFinite()) {
        degenerate = true;
        break;
      }
      // M step
      gmm.weights = counts / static_cast<double>(n);
      gmm.means = (e.resp.transpose() * frames).array().colwise() /
                  counts.array();
      const Matrix second_moment =
          (e.resp.transpose() * frames.cwiseProduct(frames)).array().colwise() /
          counts.array();
      gmm.variances = (second_moment - gmm.means.cwiseProduct(gmm.means))
                          .cwiseMax(var_floor.replicate(k, 1));

      if (ll_trace) ll_trace->push_back(e.mean_ll);
      if (e.mean_ll - prev_ll < opts.tolerance && iter > 0) break;
      prev_ll = e.mean_ll;
    }
    if (!degenerate) return gmm;
  }
  throw Error(ErrorCode::DegenerateCluster,
              "a mixture component collapsed twice during EM");
}

GmmModel map_adapt(const GmmModel& ubm, const Matrix& frames,
                   const MapConfig& cfg) {
  check_model(ubm);
  require(frames.rows() >= 1, ErrorCode::NoAdaptationData,
          "no adaptation frames");
  require(frames.cols() == ubm.dim(), ErrorCode::ShapeMismatch,
          "frame dimension does not match the UBM");
  require(cfg.relevance_factor > 0, ErrorCode::BadConfig,
          "relevance factor must be positive");

  const Matrix resp = responsibilities(ubm, frames);
  const Vector counts = resp.colwise().sum();
  const Matrix weighted = resp.transpose() * frames;  // K x D

  GmmModel adapted = ubm;
  for (Eigen::Index c = 0; c < ubm.num_components(); ++c) {
    const double n_c = counts[c];
    if (n_c <= 0.0) continue;  // no data touched this component
    const double alpha = n_c / (n_c + cfg.relevance_factor);
    const Eigen::RowVectorXd posterior_mean = weighted.row(c) / n_c;
    adapted.means.row(c) =
        alpha * posterior_mean + (1.0 - alpha) * ubm.means.row(c);
  }
  return adapted;
}

double llr_score(const GmmModel& ubm, const GmmModel& speaker,
                 const Matrix& test_frames) {
  check_model(ubm);
  check_model(speaker);
  require(ubm.num_components() == speaker.num_components() &&
              ubm.dim() == speaker.dim(),
          ErrorCode::ShapeMismatch, "models do not share K and D");
  require(test_frames.rows() >= 1, ErrorCode::EmptyTest, "no test frames");

  const Vector ll_speaker = log_likelihoods(speaker, test_frames);
  const Vector ll_ubm = log_likelihoods(ubm, test_frames);
  return (ll_speaker - ll_ubm).mean();
}

}  // namespace sv
