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

#ifndef SV_LSTM_HPP_
#define SV_LSTM_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "sv/types.hpp"

namespace sv {

struct LstmConfig {
  int input_dim = 40;
  int hidden_dim = 300;
  int num_layers = 2;

  void validate() const;
};

// One layer's parameters. Gate pre-activations are packed along rows of a
// single 4H-tall block in the order: input, forget, output, candidate.
struct LstmLayer {
  Matrix wx;  // 4H x input_dim of this layer
  Matrix wh;  // 4H x H
  Vector b;   // 4H
};

struct SoftmaxHead {
  Matrix w;  // num_speakers x H, one row per dev speaker in manifest order
  Vector b;  // num_speakers

  Eigen::Index num_speakers() const { return w.rows(); }
};

struct LstmModel {
  LstmConfig config;
  std::vector<LstmLayer> layers;
  std::optional<SoftmaxHead> head;
};

// Weights uniform in (-k, k) with k = 1/sqrt(hidden_dim); forget-gate
// biases start at 1, all other biases at 0.
LstmModel init_lstm(const LstmConfig& config, std::uint64_t seed);
void attach_softmax_head(LstmModel& model, int num_speakers,
                         std::uint64_t seed);

// Activations recorded by a batched forward pass, everything backward
// needs. Matrices are batch x H, indexed [layer][t].
struct LstmCache {
  std::vector<Matrix> inputs;  // t -> batch x input_dim (layer 0 inputs)
  struct Layer {
    std::vector<Matrix> gate_i, gate_f, gate_o, gate_g;
    std::vector<Matrix> cell, tanh_cell, hidden;
  };
  std::vector<Layer> layers;
  Eigen::Index batch_size = 0;
  Eigen::Index num_steps = 0;
};

struct LstmLayerGrads {
  Matrix wx, wh;
  Vector b;
};
struct HeadGrads {
  Matrix w;
  Vector b;
};

struct LstmGradients {
  std::vector<LstmLayerGrads> layers;
  std::optional<HeadGrads> head;
};

// Zeroed gradients shaped like the model (head block present iff the
// model has one).
LstmGradients zero_gradients(const LstmModel& model);

// Runs the stacked recurrence over a batch of equally long sequences
// (each batch x D row block per timestep is one GEMM). Returns the last
// hidden state of the top layer, batch x H. Sequences are row-major
// windows, frames x input_dim.
Matrix forward_batch(const LstmModel& model,
                     const std::vector<Matrix>& windows,
                     LstmCache* cache = nullptr);

// Single-sequence embedding, the last hidden state of the top layer.
Vector forward(const LstmModel& model, const Matrix& window,
               LstmCache* cache = nullptr);

// Exact backpropagation through time. d_embeddings is the loss gradient
// on the top layer's last hidden state (batch x H). Parameter gradients
// are accumulated into *grads; input gradients are written to *d_inputs
// (aligned with the forward windows) when non-null.
void backward_batch(const LstmModel& model, const LstmCache& cache,
                    const Matrix& d_embeddings, LstmGradients* grads,
                    std::vector<Matrix>* d_inputs = nullptr);

// Flat views over every trainable value, layer weights and biases first,
// then the head when present. Gradient views follow the identical order.
std::vector<Eigen::Map<Vector>> parameter_views(LstmModel& model);
std::vector<Eigen::Map<Vector>> gradient_views(LstmGradients& grads);
std::vector<const Matrix*> trunk_weight_matrices(const LstmModel& model);

}  // namespace sv

#endif  // SV_LSTM_HPP_
