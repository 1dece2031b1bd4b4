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
#include <random>

#include "doctest.h"
#include "support/test_util.hpp"
#include "sv/error.hpp"

namespace {

sv::Matrix gaussian_frames(Eigen::Index n, const sv::Vector& mean,
                           const sv::Vector& std_dev, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  sv::Matrix frames(n, mean.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < mean.size(); ++c) {
      frames(r, c) = mean[c] + std_dev[c] * unit(rng);
    }
  }
  return frames;
}

}  // namespace

TEST_CASE("single-component EM recovers the sample moments") {
  std::mt19937_64 rng(1);
  sv::Vector mean(3), stddev(3);
  mean << 1.0, -2.0, 0.5;
  stddev << 0.5, 2.0, 1.0;
  const sv::Matrix frames = gaussian_frames(500, mean, stddev, rng);

  sv::UbmTrainOptions opts;
  opts.num_components = 1;
  const sv::GmmModel gmm = sv::train_ubm(frames, opts);

  const sv::Vector sample_mean = frames.colwise().mean();
  const sv::Vector sample_var =
      ((frames.rowwise() - sample_mean.transpose()).array().square().colwise().sum() /
       frames.rows())
          .transpose();
  CHECK(gmm.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((gmm.means.row(0).transpose() - sample_mean).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK((gmm.variances.row(0).transpose() - sample_var).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("EM separates two well-separated clusters") {
  std::mt19937_64 rng(2);
  sv::Vector mean_a(2), mean_b(2), stddev(2);
  mean_a << -4.0, 0.0;
  mean_b << 4.0, 1.0;
  stddev << 0.4, 0.4;
  sv::Matrix frames(900, 2);
  frames.topRows(600) = gaussian_frames(600, mean_a, stddev, rng);
  frames.bottomRows(300) = gaussian_frames(300, mean_b, stddev, rng);

  sv::UbmTrainOptions opts;
  opts.num_components = 2;
  opts.seed = 3;
  std::vector<double> trace;
  const sv::GmmModel gmm = sv::train_ubm(frames, opts, &trace);

  for (size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-10);
  }

  const int a = gmm.means(0, 0) < gmm.means(1, 0) ? 0 : 1;
  const int b = 1 - a;
  CHECK((gmm.means.row(a).transpose() - mean_a).cwiseAbs().maxCoeff() < 0.1);
  CHECK((gmm.means.row(b).transpose() - mean_b).cwiseAbs().maxCoeff() < 0.1);
  CHECK(std::abs(gmm.weights[a] - 2.0 / 3.0) < 0.05);
  CHECK(std::abs(gmm.weights[b] - 1.0 / 3.0) < 0.05);
  CHECK(std::abs(gmm.weights.sum() - 1.0) < 1e-9);
}

TEST_CASE("EM log-likelihood is monotone on unstructured data") {
  std::mt19937_64 rng(4);
  const sv::Matrix frames = svtest::random_matrix(400, 5, rng, 2.0);
  sv::UbmTrainOptions opts;
  opts.num_components = 4;
  opts.seed = 5;
  std::vector<double> trace;
  sv::train_ubm(frames, opts, &trace);
  REQUIRE(trace.size() >= 2);
  for (size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-10);
  }
}

TEST_CASE("responsibilities sum to one per frame") {
  std::mt19937_64 rng(6);
  const sv::Matrix frames = svtest::random_matrix(100, 3, rng, 2.0);
  sv::UbmTrainOptions opts;
  opts.num_components = 3;
  const sv::GmmModel gmm = sv::train_ubm(frames, opts);
  const sv::Matrix resp = sv::responsibilities(gmm, frames);
  for (Eigen::Index r = 0; r < resp.rows(); ++r) {
    CHECK(std::abs(resp.row(r).sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("train_ubm needs ten frames per component") {
  std::mt19937_64 rng(7);
  const sv::Matrix frames = svtest::random_matrix(30, 2, rng);
  sv::UbmTrainOptions opts;
  opts.num_components = 4;
  try {
    sv::train_ubm(frames, opts);
    FAIL("expected TooFewFrames");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::TooFewFrames);
  }
}

TEST_CASE("MAP adaptation follows the relevance blend") {
  std::mt19937_64 rng(8);
  sv::Vector mean(2), stddev(2);
  mean << 0.0, 0.0;
  stddev << 1.0, 1.0;
  const sv::Matrix frames = gaussian_frames(200, mean, stddev, rng);
  sv::UbmTrainOptions opts;
  opts.num_components = 1;
  const sv::GmmModel ubm = sv::train_ubm(frames, opts);

  std::normal_distribution<double> unit(0.0, 1.0);
  sv::Matrix speaker_frames(40, 2);
  for (Eigen::Index r = 0; r < 40; ++r) {
    speaker_frames(r, 0) = 2.0 + 0.3 * unit(rng);
    speaker_frames(r, 1) = -1.0 + 0.3 * unit(rng);
  }
  const sv::Vector posterior_mean = speaker_frames.colwise().mean();

  SUBCASE("r -> 0 gives the posterior mean") {
    const sv::GmmModel adapted =
        sv::map_adapt(ubm, speaker_frames, {1e-12});
    CHECK((adapted.means.row(0).transpose() - posterior_mean)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
  SUBCASE("r -> infinity returns the UBM") {
    const sv::GmmModel adapted = sv::map_adapt(ubm, speaker_frames, {1e15});
    CHECK((adapted.means - ubm.means).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(adapted.weights == ubm.weights);
    CHECK(adapted.variances == ubm.variances);
  }
  SUBCASE("hand-computed two-frame case") {
    sv::Matrix two(2, 2);
    two << 1.0, 3.0, 3.0, 5.0;
    const double r = 16.0;
    const sv::GmmModel adapted = sv::map_adapt(ubm, two, {r});
    // K = 1: every responsibility is 1, n = 2, E[x] = (2, 4).
    const double alpha = 2.0 / (2.0 + r);
    for (int d = 0; d < 2; ++d) {
      const double expected =
          alpha * (d == 0 ? 2.0 : 4.0) + (1.0 - alpha) * ubm.means(0, d);
      CHECK(std::abs(adapted.means(0, d) - expected) < 1e-12);
    }
  }
}

TEST_CASE("components untouched by adaptation data stay unchanged") {
  sv::GmmModel ubm;
  ubm.weights = sv::Vector::Constant(2, 0.5);
  ubm.means = sv::Matrix(2, 1);
  ubm.means << 0.0, 1000.0;  // the far component sees underflow-zero posteriors
  ubm.variances = sv::Matrix::Ones(2, 1);

  sv::Matrix frames(3, 1);
  frames << -0.1, 0.05, 0.2;
  const sv::GmmModel adapted = sv::map_adapt(ubm, frames, {16.0});
  CHECK(adapted.means(1, 0) == 1000.0);
  CHECK(adapted.means(0, 0) != 0.0);
}

TEST_CASE("map_adapt requires frames") {
  sv::GmmModel ubm;
  ubm.weights = sv::Vector::Ones(1);
  ubm.means = sv::Matrix::Zero(1, 2);
  ubm.variances = sv::Matrix::Ones(1, 2);
  try {
    sv::map_adapt(ubm, sv::Matrix(0, 2), {16.0});
    FAIL("expected NoAdaptationData");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::NoAdaptationData);
  }
}

TEST_CASE("llr_score of the UBM against itself is zero") {
  std::mt19937_64 rng(9);
  const sv::Matrix frames = svtest::random_matrix(50, 3, rng);
  sv::UbmTrainOptions opts;
  opts.num_components = 2;
  const sv::GmmModel ubm = sv::train_ubm(
      svtest::random_matrix(200, 3, rng, 2.0), opts);
  CHECK(sv::llr_score(ubm, ubm, frames) == 0.0);
}

TEST_CASE("llr_score matches the closed form for one Gaussian, one frame") {
  sv::GmmModel ubm, speaker;
  ubm.weights = sv::Vector::Ones(1);
  ubm.means = sv::Matrix(1, 2);
  ubm.means << 0.0, 0.0;
  ubm.variances = sv::Matrix(1, 2);
  ubm.variances << 1.0, 2.0;
  speaker = ubm;
  speaker.means << 0.5, -0.5;

  sv::Matrix frame(1, 2);
  frame << 0.3, 0.7;

  auto log_density = [](const sv::Vector& x, const sv::Vector& mu,
                        const sv::Vector& var) {
    double acc = 0.0;
    for (Eigen::Index d = 0; d < x.size(); ++d) {
      acc += -0.5 * (std::log(2.0 * M_PI * var[d]) +
                     (x[d] - mu[d]) * (x[d] - mu[d]) / var[d]);
    }
    return acc;
  };
  const double expected =
      log_density(frame.row(0), speaker.means.row(0), speaker.variances.row(0)) -
      log_density(frame.row(0), ubm.means.row(0), ubm.variances.row(0));
  CHECK(std::abs(sv::llr_score(ubm, speaker, frame) - expected) < 1e-12);
}

TEST_CASE("llr_score is invariant under frame reordering") {
  std::mt19937_64 rng(10);
  const sv::Matrix base = svtest::random_matrix(200, 3, rng, 2.0);
  sv::UbmTrainOptions opts;
  opts.num_components = 2;
  const sv::GmmModel ubm = sv::train_ubm(base, opts);
  const sv::GmmModel spk = sv::map_adapt(ubm, base.topRows(50), {16.0});

  sv::Matrix test = svtest::random_matrix(30, 3, rng);
  const double forward_order = sv::llr_score(ubm, spk, test);
  const sv::Matrix reversed = test.colwise().reverse();
  const double reverse_order = sv::llr_score(ubm, spk, reversed);
  CHECK(std::abs(forward_order - reverse_order) < 1e-12);
}

TEST_CASE("frames from the adapted model score above another speaker's") {
  std::mt19937_64 rng(11);
  sv::Vector pool_mean(3), pool_std(3);
  pool_mean << 0.0, 0.0, 0.0;
  pool_std << 2.0, 2.0, 2.0;
  const sv::Matrix pool = gaussian_frames(600, pool_mean, pool_std, rng);
  sv::UbmTrainOptions opts;
  opts.num_components = 4;
  opts.seed = 12;
  const sv::GmmModel ubm = sv::train_ubm(pool, opts);

  sv::Vector mean_a(3), mean_b(3), stddev(3);
  mean_a << 1.5, -1.0, 0.5;
  mean_b << -1.5, 1.0, -0.5;
  stddev << 0.5, 0.5, 0.5;
  const sv::GmmModel spk_a =
      sv::map_adapt(ubm, gaussian_frames(150, mean_a, stddev, rng), {4.0});
  const sv::GmmModel spk_b =
      sv::map_adapt(ubm, gaussian_frames(150, mean_b, stddev, rng), {4.0});

  const sv::Matrix test_a = gaussian_frames(100, mean_a, stddev, rng);
  CHECK(sv::llr_score(ubm, spk_a, test_a) > sv::llr_score(ubm, spk_b, test_a));
}

TEST_CASE("llr_score rejects empty tests and mismatched models") {
  sv::GmmModel a;
  a.weights = sv::Vector::Ones(1);
  a.means = sv::Matrix::Zero(1, 2);
  a.variances = sv::Matrix::Ones(1, 2);
  sv::GmmModel b = a;

  try {
    sv::llr_score(a, b, sv::Matrix(0, 2));
    FAIL("expected EmptyTest");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::EmptyTest);
  }

  sv::GmmModel c;
  c.weights = sv::Vector::Constant(2, 0.5);
  c.means = sv::Matrix::Zero(2, 2);
  c.variances = sv::Matrix::Ones(2, 2);
  try {
    sv::llr_score(a, c, sv::Matrix::Zero(1, 2));
    FAIL("expected ShapeMismatch");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::ShapeMismatch);
  }
}
