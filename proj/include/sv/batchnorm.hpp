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

#ifndef SV_BATCHNORM_HPP_
#define SV_BATCHNORM_HPP_

#include <vector>

#include "sv/types.hpp"

namespace sv {

// Per-coefficient batch normalization over the batch x time axes of the
// input feature windows, applied before the first LSTM layer. Training
// uses batch statistics and maintains running statistics for evaluation.
struct BatchNorm {
  Vector gamma;  // learnable scale
  Vector beta;   // learnable shift
  Vector running_mean;
  Vector running_var;
  double momentum = 0.99;
  double eps = 1e-8;

  BatchNorm() = default;
  explicit BatchNorm(int dim)
      : gamma(Vector::Ones(dim)),
        beta(Vector::Zero(dim)),
        running_mean(Vector::Zero(dim)),
        running_var(Vector::Ones(dim)) {}

  Eigen::Index dim() const { return gamma.size(); }

  struct Cache {
    Matrix x_hat;     // stacked normalized rows, m x dim
    Vector inv_std;   // 1/sqrt(var + eps)
    std::vector<Eigen::Index> rows_per_window;
  };

  // Batch statistics over all frames of all windows; updates running
  // stats with the configured momentum. Requires >= 2 windows.
  std::vector<Matrix> forward_train(const std::vector<Matrix>& windows,
                                    Cache* cache);

  // Running-statistics normalization for a single window.
  Matrix forward_eval(const Matrix& window) const;

  // d_outputs aligned with the forward windows. Accumulates dgamma/dbeta
  // and returns per-window input gradients.
  std::vector<Matrix> backward(const Cache& cache,
                               const std::vector<Matrix>& d_outputs,
                               Vector* d_gamma, Vector* d_beta) const;
};

struct BatchNormGrads {
  Vector gamma;
  Vector beta;
};

}  // namespace sv

#endif  // SV_BATCHNORM_HPP_
