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

#ifndef SV_LOSSES_HPP_
#define SV_LOSSES_HPP_

#include <vector>

#include "sv/lstm.hpp"
#include "sv/types.hpp"

namespace sv {

struct ContrastiveConfig {
  double margin = 1.0;   // M
  double lambda = 1e-4;  // L2 coefficient on trunk weight matrices

  void validate() const;
};

// A pair by reference into a shared window list. label 1 = genuine
// (same speaker), 0 = impostor.
struct PairRef {
  int first = 0;
  int second = 0;
  int label = 0;
};

// An explicit trial pair, the unit of contrastive training.
struct TrialPair {
  Matrix x1, x2;
  int label = 0;
};

// -log softmax(W e + b)[speaker_index], max-subtracted for stability.
double softmax_loss(const LstmModel& model, const Matrix& window,
                    int speaker_index);

// Euclidean distance between the two embeddings under shared weights.
double pair_distance(const LstmModel& model, const Matrix& x1,
                     const Matrix& x2);

// Mean over pairs of Y*0.5*D^2 + (1-Y)*0.5*max(0, M-D)^2, plus
// lambda * sum of squared trunk weights.
double contrastive_loss(const LstmModel& model,
                        const std::vector<TrialPair>& batch,
                        const ContrastiveConfig& cfg);

// lambda * ||W||^2 over trunk weight matrices (biases excluded) and its
// gradient contribution.
double regularizer_loss(const LstmModel& model, double lambda);
void add_regularizer_gradients(const LstmModel& model, double lambda,
                               LstmGradients* grads);

// --- training drivers: loss plus exact gradients ---

// Mean cross-entropy over the batch. Accumulates parameter gradients into
// *grads (head block must be present); writes per-window input gradients
// when d_inputs is non-null.
double softmax_loss_batch(const LstmModel& model,
                          const std::vector<Matrix>& windows,
                          const std::vector<int>& speaker_indices,
                          LstmGradients* grads = nullptr,
                          std::vector<Matrix>* d_inputs = nullptr);

struct ContrastiveBatchStats {
  double loss = 0.0;
  double mean_genuine_distance = 0.0;
  double mean_impostor_distance = 0.0;
};

// Contrastive loss over pairs referencing a shared window list; each
// window is embedded once no matter how many pairs touch it. The hinge
// subgradient is 0 at D >= M; coincident embeddings use an epsilon-guarded
// direction. Gradients accumulate into *grads; d_inputs aligns with
// windows.
ContrastiveBatchStats contrastive_loss_batch(
    const LstmModel& model, const std::vector<Matrix>& windows,
    const std::vector<PairRef>& pairs, const ContrastiveConfig& cfg,
    LstmGradients* grads = nullptr, std::vector<Matrix>* d_inputs = nullptr);

}  // namespace sv

#endif  // SV_LOSSES_HPP_
