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

#include "sv/error.hpp"

namespace sv {

std::vector<Matrix> BatchNorm::forward_train(const std::vector<Matrix>& windows,
                                             Cache* cache) {
  require(windows.size() >= 2, ErrorCode::BatchTooSmall,
          "batch normalization needs at least 2 windows in training mode");

  Eigen::Index m = 0;
  for (const Matrix& w : windows) {
    require(w.cols() == dim(), ErrorCode::ShapeMismatch,
            "window width does not match batch norm dimension");
    m += w.rows();
  }

  Matrix stacked(m, dim());
  Eigen::Index row = 0;
  for (const Matrix& w : windows) {
    stacked.middleRows(row, w.rows()) = w;
    row += w.rows();
  }

  const Vector mean = stacked.colwise().mean();
  Matrix centered = stacked.rowwise() - mean.transpose();
  const Vector var =
      centered.array().square().colwise().sum().transpose() / m;
  const Vector inv_std = (var.array() + eps).rsqrt();

  Matrix x_hat = centered.array().rowwise() * inv_std.transpose().array();
  Matrix out = x_hat.array().rowwise() * gamma.transpose().array();
  out.array().rowwise() += beta.transpose().array();

  running_mean = momentum * running_mean + (1.0 - momentum) * mean;
  running_var = momentum * running_var + (1.0 - momentum) * var;

  std::vector<Matrix> outputs;
  outputs.reserve(windows.size());
  row = 0;
  std::vector<Eigen::Index> rows_per_window;
  for (const Matrix& w : windows) {
    outputs.push_back(out.middleRows(row, w.rows()));
    rows_per_window.push_back(w.rows());
    row += w.rows();
  }
  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->inv_std = inv_std;
    cache->rows_per_window = std::move(rows_per_window);
  }
  return outputs;
}

Matrix BatchNorm::forward_eval(const Matrix& window) const {
  require(window.cols() == dim(), ErrorCode::ShapeMismatch,
          "window width does not match batch norm dimension");
  const Vector inv_std = (running_var.array() + eps).rsqrt();
  Matrix out = window.rowwise() - running_mean.transpose();
  out = out.array().rowwise() * (inv_std.array() * gamma.array()).transpose();
  out.array().rowwise() += beta.transpose().array();
  return out;
}

std::vector<Matrix> BatchNorm::backward(const Cache& cache,
                                        const std::vector<Matrix>& d_outputs,
                                        Vector* d_gamma,
                                        Vector* d_beta) const {
  require(d_outputs.size() == cache.rows_per_window.size(),
          ErrorCode::StaleCache, "gradient windows do not match the cache");

  const Eigen::Index m = cache.x_hat.rows();
  Matrix dy(m, dim());
  Eigen::Index row = 0;
  for (size_t i = 0; i < d_outputs.size(); ++i) {
    require(d_outputs[i].rows() == cache.rows_per_window[i] &&
                d_outputs[i].cols() == dim(),
            ErrorCode::StaleCache, "gradient shape does not match the cache");
    dy.middleRows(row, d_outputs[i].rows()) = d_outputs[i];
    row += d_outputs[i].rows();
  }

  const Vector sum_dy = dy.colwise().sum();
  const Vector sum_dy_xhat =
      (dy.array() * cache.x_hat.array()).colwise().sum();
  if (d_gamma) *d_gamma += sum_dy_xhat;
  if (d_beta) *d_beta += sum_dy;

  // dx = gamma * inv_std * (dy - mean(dy) - x_hat * mean(dy .* x_hat))
  const Vector coef = (gamma.array() * cache.inv_std.array()).matrix();
  Matrix dx = dy;
  dx.array().rowwise() -= sum_dy.transpose().array() / m;
  dx.array() -= cache.x_hat.array().rowwise() *
                (sum_dy_xhat.transpose().array() / m);
  dx.array().rowwise() *= coef.transpose().array();

  std::vector<Matrix> d_inputs;
  d_inputs.reserve(d_outputs.size());
  row = 0;
  for (Eigen::Index rows : cache.rows_per_window) {
    d_inputs.push_back(dx.middleRows(row, rows));
    row += rows;
  }
  return d_inputs;
}

}  // namespace sv
