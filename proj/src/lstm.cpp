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

#include "sv/lstm.hpp"

#include <cmath>
#include <random>

#include "sv/error.hpp"

namespace sv {

namespace {

Matrix sigmoid(const Matrix& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double limit,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace

void LstmConfig::validate() const {
  require(input_dim >= 1 && hidden_dim >= 1 && num_layers >= 1,
          ErrorCode::BadConfig, "LSTM dimensions must be at least 1");
}

LstmModel init_lstm(const LstmConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const double limit = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  const int h = config.hidden_dim;

  LstmModel model;
  model.config = config;
  for (int l = 0; l < config.num_layers; ++l) {
    const int in_dim = l == 0 ? config.input_dim : h;
    LstmLayer layer;
    layer.wx = uniform_matrix(4 * h, in_dim, limit, rng);
    layer.wh = uniform_matrix(4 * h, h, limit, rng);
    layer.b = Vector::Zero(4 * h);
    layer.b.segment(h, h).setOnes();  // forget gate bias
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void attach_softmax_head(LstmModel& model, int num_speakers,
                         std::uint64_t seed) {
  require(num_speakers >= 1, ErrorCode::BadConfig, "need at least 1 speaker");
  std::mt19937_64 rng(seed);
  const double limit = 1.0 / std::sqrt(static_cast<double>(model.config.hidden_dim));
  SoftmaxHead head;
  head.w = uniform_matrix(num_speakers, model.config.hidden_dim, limit, rng);
  head.b = Vector::Zero(num_speakers);
  model.head = std::move(head);
}

LstmGradients zero_gradients(const LstmModel& model) {
  LstmGradients g;
  for (const auto& layer : model.layers) {
    LstmLayerGrads lg;
    lg.wx = Matrix::Zero(layer.wx.rows(), layer.wx.cols());
    lg.wh = Matrix::Zero(layer.wh.rows(), layer.wh.cols());
    lg.b = Vector::Zero(layer.b.size());
    g.layers.push_back(std::move(lg));
  }
  if (model.head) {
    HeadGrads hg;
    hg.w = Matrix::Zero(model.head->w.rows(), model.head->w.cols());
    hg.b = Vector::Zero(model.head->b.size());
    g.head = std::move(hg);
  }
  return g;
}

Matrix forward_batch(const LstmModel& model, const std::vector<Matrix>& windows,
                     LstmCache* cache) {
  require(!windows.empty(), ErrorCode::EmptyBatch, "no windows to embed");
  const auto batch = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index steps = windows[0].rows();
  const int h = model.config.hidden_dim;
  require(steps >= 1, ErrorCode::ShapeMismatch, "empty sequence");
  for (const Matrix& w : windows) {
    require(w.rows() == steps && w.cols() == model.config.input_dim,
            ErrorCode::ShapeMismatch,
            "window shape does not match the model input");
  }

  // Timestep-major input: one batch x D block per frame.
  std::vector<Matrix> x(static_cast<size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    Matrix block(batch, model.config.input_dim);
    for (Eigen::Index bi = 0; bi < batch; ++bi) {
      block.row(bi) = windows[static_cast<size_t>(bi)].row(t);
    }
    x[static_cast<size_t>(t)] = std::move(block);
  }

  LstmCache local;
  LstmCache& c = cache ? *cache : local;
  c.inputs = std::move(x);
  c.layers.assign(model.layers.size(), {});
  c.batch_size = batch;
  c.num_steps = steps;

  Matrix layer_out;  // hidden sequence of the previous layer, reused per t
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const LstmLayer& layer = model.layers[l];
    auto& lc = c.layers[l];
    const auto n = static_cast<size_t>(steps);
    lc.gate_i.resize(n);
    lc.gate_f.resize(n);
    lc.gate_o.resize(n);
    lc.gate_g.resize(n);
    lc.cell.resize(n);
    lc.tanh_cell.resize(n);
    lc.hidden.resize(n);

    Matrix h_prev = Matrix::Zero(batch, h);
    Matrix c_prev = Matrix::Zero(batch, h);
    for (Eigen::Index t = 0; t < steps; ++t) {
      const size_t ti = static_cast<size_t>(t);
      const Matrix& input =
          l == 0 ? c.inputs[ti] : c.layers[l - 1].hidden[ti];
      Matrix pre = input * layer.wx.transpose() + h_prev * layer.wh.transpose();
      pre.rowwise() += layer.b.transpose();

      lc.gate_i[ti] = sigmoid(pre.middleCols(0, h));
      lc.gate_f[ti] = sigmoid(pre.middleCols(h, h));
      lc.gate_o[ti] = sigmoid(pre.middleCols(2 * h, h));
      lc.gate_g[ti] = pre.middleCols(3 * h, h).array().tanh().matrix();

      lc.cell[ti] = lc.gate_f[ti].cwiseProduct(c_prev) +
                    lc.gate_i[ti].cwiseProduct(lc.gate_g[ti]);
      lc.tanh_cell[ti] = lc.cell[ti].array().tanh().matrix();
      lc.hidden[ti] = lc.gate_o[ti].cwiseProduct(lc.tanh_cell[ti]);

      h_prev = lc.hidden[ti];
      c_prev = lc.cell[ti];
    }
  }

  Matrix embeddings = c.layers.back().hidden[static_cast<size_t>(steps - 1)];
  require(embeddings.allFinite(), ErrorCode::NonFiniteActivation,
          "non-finite embedding");
  return embeddings;
}

Vector forward(const LstmModel& model, const Matrix& window, LstmCache* cache) {
  const Matrix emb = forward_batch(model, {window}, cache);
  return emb.row(0).transpose();
}

void backward_batch(const LstmModel& model, const LstmCache& cache,
                    const Matrix& d_embeddings, LstmGradients* grads,
                    std::vector<Matrix>* d_inputs) {
  const Eigen::Index batch = cache.batch_size;
  const Eigen::Index steps = cache.num_steps;
  const int h = model.config.hidden_dim;
  require(grads != nullptr, ErrorCode::BadConfig, "null gradient sink");
  require(cache.layers.size() == model.layers.size() &&
              cache.num_steps >= 1 &&
              static_cast<Eigen::Index>(cache.inputs.size()) == steps &&
              d_embeddings.rows() == batch && d_embeddings.cols() == h,
          ErrorCode::StaleCache, "cache does not match model and gradient");
  require(grads->layers.size() == model.layers.size(), ErrorCode::StaleCache,
          "gradient sink does not match model");

  // d_ext[t]: gradient arriving at layer l's hidden state from above.
  std::vector<Matrix> d_ext(static_cast<size_t>(steps),
                            Matrix::Zero(batch, h));
  d_ext[static_cast<size_t>(steps - 1)] = d_embeddings;
  const Matrix zero_state = Matrix::Zero(batch, h);

  for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
    const LstmLayer& layer = model.layers[static_cast<size_t>(l)];
    const auto& lc = cache.layers[static_cast<size_t>(l)];
    LstmLayerGrads& lg = grads->layers[static_cast<size_t>(l)];

    std::vector<Matrix> d_layer_in(static_cast<size_t>(steps));
    Matrix dh_rec = Matrix::Zero(batch, h);
    Matrix dc = Matrix::Zero(batch, h);
    Matrix da(batch, 4 * h);

    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      const size_t ti = static_cast<size_t>(t);
      const Matrix& input =
          l == 0 ? cache.inputs[ti] : cache.layers[static_cast<size_t>(l - 1)].hidden[ti];
      const Matrix& h_prev = t == 0 ? zero_state : lc.hidden[ti - 1];
      const Matrix& c_prev = t == 0 ? zero_state : lc.cell[ti - 1];

      const Matrix dh = d_ext[ti] + dh_rec;
      const Matrix d_out = dh.cwiseProduct(lc.tanh_cell[ti]);
      dc += dh.cwiseProduct(lc.gate_o[ti])
                .cwiseProduct((1.0 - lc.tanh_cell[ti].array().square()).matrix());

      const Matrix d_in_gate = dc.cwiseProduct(lc.gate_g[ti]);
      const Matrix d_forget = dc.cwiseProduct(c_prev);
      const Matrix d_cand = dc.cwiseProduct(lc.gate_i[ti]);

      da.middleCols(0, h) =
          d_in_gate.cwiseProduct(lc.gate_i[ti])
              .cwiseProduct((1.0 - lc.gate_i[ti].array()).matrix());
      da.middleCols(h, h) =
          d_forget.cwiseProduct(lc.gate_f[ti])
              .cwiseProduct((1.0 - lc.gate_f[ti].array()).matrix());
      da.middleCols(2 * h, h) =
          d_out.cwiseProduct(lc.gate_o[ti])
              .cwiseProduct((1.0 - lc.gate_o[ti].array()).matrix());
      da.middleCols(3 * h, h) =
          d_cand.cwiseProduct((1.0 - lc.gate_g[ti].array().square()).matrix());

      lg.wx.noalias() += da.transpose() * input;
      lg.wh.noalias() += da.transpose() * h_prev;
      lg.b.noalias() += da.colwise().sum().transpose();

      d_layer_in[ti].noalias() = da * layer.wx;
      dh_rec.noalias() = da * layer.wh;
      dc = dc.cwiseProduct(lc.gate_f[ti]);
    }
    d_ext = std::move(d_layer_in);
  }

  if (d_inputs) {
    d_inputs->assign(static_cast<size_t>(batch), Matrix());
    for (Eigen::Index bi = 0; bi < batch; ++bi) {
      Matrix g(steps, model.config.input_dim);
      for (Eigen::Index t = 0; t < steps; ++t) {
        g.row(t) = d_ext[static_cast<size_t>(t)].row(bi);
      }
      (*d_inputs)[static_cast<size_t>(bi)] = std::move(g);
    }
  }
}

std::vector<Eigen::Map<Vector>> parameter_views(LstmModel& model) {
  std::vector<Eigen::Map<Vector>> views;
  for (auto& layer : model.layers) {
    views.emplace_back(layer.wx.data(), layer.wx.size());
    views.emplace_back(layer.wh.data(), layer.wh.size());
    views.emplace_back(layer.b.data(), layer.b.size());
  }
  if (model.head) {
    views.emplace_back(model.head->w.data(), model.head->w.size());
    views.emplace_back(model.head->b.data(), model.head->b.size());
  }
  return views;
}

std::vector<Eigen::Map<Vector>> gradient_views(LstmGradients& grads) {
  std::vector<Eigen::Map<Vector>> views;
  for (auto& layer : grads.layers) {
    views.emplace_back(layer.wx.data(), layer.wx.size());
    views.emplace_back(layer.wh.data(), layer.wh.size());
    views.emplace_back(layer.b.data(), layer.b.size());
  }
  if (grads.head) {
    views.emplace_back(grads.head->w.data(), grads.head->w.size());
    views.emplace_back(grads.head->b.data(), grads.head->b.size());
  }
  return views;
}

std::vector<const Matrix*> trunk_weight_matrices(const LstmModel& model) {
  std::vector<const Matrix*> mats;
  for (const auto& layer : model.layers) {
    mats.push_back(&layer.wx);
    mats.push_back(&layer.wh);
  }
  return mats;
}

}  // namespace sv
