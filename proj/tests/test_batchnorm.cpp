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

#include "sv/batchnorm.hpp"

#include <random>
#include <vector>

#include "doctest.h"
#include "support/test_util.hpp"
#include "sv/error.hpp"

namespace {

std::vector<sv::Matrix> random_windows(int count, Eigen::Index rows,
                                       Eigen::Index cols,
                                       std::mt19937_64& rng) {
  std::vector<sv::Matrix> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(svtest::random_matrix(rows, cols, rng, 3.0));
    out.back().array() += static_cast<double>(i);  // distinct means
  }
  return out;
}

}  // namespace

TEST_CASE("training mode normalizes to zero mean and unit variance") {
  std::mt19937_64 rng(1);
  sv::BatchNorm bn(6);
  const auto windows = random_windows(4, 20, 6, rng);
  const auto out = bn.forward_train(windows, nullptr);

  Eigen::Index m = 0;
  for (const auto& w : out) m += w.rows();
  sv::Matrix stacked(m, 6);
  Eigen::Index row = 0;
  for (const auto& w : out) {
    stacked.middleRows(row, w.rows()) = w;
    row += w.rows();
  }
  for (Eigen::Index c = 0; c < 6; ++c) {
    const double mean = stacked.col(c).mean();
    const double var =
        (stacked.col(c).array() - mean).square().sum() / m;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("eval mode with running stats equal to batch stats matches training") {
  std::mt19937_64 rng(2);
  sv::BatchNorm bn(5);
  bn.momentum = 0.0;  // running stats become the batch stats
  const auto windows = random_windows(3, 15, 5, rng);
  const auto train_out = bn.forward_train(windows, nullptr);
  for (size_t i = 0; i < windows.size(); ++i) {
    const sv::Matrix eval_out = bn.forward_eval(windows[i]);
    CHECK((eval_out - train_out[i]).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("batch norm gradients match finite differences") {
  std::mt19937_64 rng(3);
  sv::BatchNorm bn(4);
  bn.gamma << 1.1, 0.9, 1.3, 0.7;
  bn.beta << 0.1, -0.2, 0.0, 0.4;
  auto windows = random_windows(3, 6, 4, rng);
  const auto weights = random_windows(3, 6, 4, rng);  // fixed projection

  auto loss_of = [&](const std::vector<sv::Matrix>& wins) {
    sv::BatchNorm copy = bn;
    const auto out = copy.forward_train(wins, nullptr);
    double acc = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
      acc += (out[i].array() * weights[i].array()).sum();
    }
    return acc;
  };

  sv::BatchNorm::Cache cache;
  sv::BatchNorm work = bn;
  const auto outputs = work.forward_train(windows, &cache);
  sv::Vector d_gamma = sv::Vector::Zero(4), d_beta = sv::Vector::Zero(4);
  const auto d_inputs = work.backward(cache, weights, &d_gamma, &d_beta);

  const double step = 1e-6;
  double worst = 0.0;
  // input gradients
  for (size_t w = 0; w < windows.size(); ++w) {
    for (Eigen::Index r = 0; r < windows[w].rows(); ++r) {
      for (Eigen::Index c = 0; c < windows[w].cols(); ++c) {
        const double saved = windows[w](r, c);
        windows[w](r, c) = saved + step;
        const double up = loss_of(windows);
        windows[w](r, c) = saved - step;
        const double down = loss_of(windows);
        windows[w](r, c) = saved;
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst,
                         std::abs(numeric - d_inputs[w](r, c)) /
                             std::max({1.0, std::abs(numeric)}));
      }
    }
  }
  // scale and shift gradients
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (int which = 0; which < 2; ++which) {
      sv::Vector& p = which == 0 ? bn.gamma : bn.beta;
      const double analytic = which == 0 ? d_gamma[i] : d_beta[i];
      const double saved = p[i];
      p[i] = saved + step;
      const double up = loss_of(windows);
      p[i] = saved - step;
      const double down = loss_of(windows);
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, std::abs(numeric - analytic) /
                                  std::max({1.0, std::abs(numeric)}));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("training mode needs at least two windows") {
  sv::BatchNorm bn(3);
  std::mt19937_64 rng(4);
  const std::vector<sv::Matrix> one = {svtest::random_matrix(5, 3, rng)};
  try {
    bn.forward_train(one, nullptr);
    FAIL("expected BatchTooSmall");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::BatchTooSmall);
  }
}

TEST_CASE("running statistics move toward batch statistics") {
  std::mt19937_64 rng(5);
  sv::BatchNorm bn(2);
  bn.momentum = 0.5;
  std::vector<sv::Matrix> windows = {
      sv::Matrix::Constant(10, 2, 4.0),
      sv::Matrix::Constant(10, 2, 4.0),
  };
  bn.forward_train(windows, nullptr);
  // batch mean 4, var 0: running mean = 0.5*0 + 0.5*4 = 2
  CHECK(bn.running_mean[0] == doctest::Approx(2.0));
  CHECK(bn.running_var[0] == doctest::Approx(0.5));
}
