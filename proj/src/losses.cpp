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

#include "sv/losses.hpp"

#include <cmath>

#include "sv/error.hpp"

namespace sv {

namespace {

constexpr double kDistanceEps = 1e-12;

// Row-wise log softmax with max subtraction.
Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse =
        std::log((logits.row(r).array() - mx).exp().sum()) + mx;
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

}  // namespace

void ContrastiveConfig::validate() const {
  require(margin > 0, ErrorCode::BadConfig, "margin must be positive");
  require(lambda >= 0, ErrorCode::BadConfig, "lambda must be nonnegative");
}

double softmax_loss(const LstmModel& model, const Matrix& window,
                    int speaker_index) {
  require(model.head.has_value(), ErrorCode::BadConfig,
          "model has no softmax head");
  require(speaker_index >= 0 &&
              speaker_index < model.head->num_speakers(),
          ErrorCode::IndexOutOfRange, "speaker index out of range");
  const Vector emb = forward(model, window);
  const Vector logits = model.head->w * emb + model.head->b;
  const double mx = logits.maxCoeff();
  const double lse = std::log((logits.array() - mx).exp().sum()) + mx;
  return lse - logits[speaker_index];
}

double pair_distance(const LstmModel& model, const Matrix& x1,
                     const Matrix& x2) {
  const Matrix emb = forward_batch(model, {x1, x2});
  return (emb.row(0) - emb.row(1)).norm();
}

double regularizer_loss(const LstmModel& model, double lambda) {
  if (lambda == 0.0) return 0.0;
  double sum = 0.0;
  for (const Matrix* w : trunk_weight_matrices(model)) sum += w->squaredNorm();
  return lambda * sum;
}

void add_regularizer_gradients(const LstmModel& model, double lambda,
                               LstmGradients* grads) {
  if (lambda == 0.0) return;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    grads->layers[l].wx += 2.0 * lambda * model.layers[l].wx;
    grads->layers[l].wh += 2.0 * lambda * model.layers[l].wh;
  }
}

double softmax_loss_batch(const LstmModel& model,
                          const std::vector<Matrix>& windows,
                          const std::vector<int>& speaker_indices,
                          LstmGradients* grads,
                          std::vector<Matrix>* d_inputs) {
  require(model.head.has_value(), ErrorCode::BadConfig,
          "model has no softmax head");
  require(!windows.empty(), ErrorCode::EmptyBatch, "empty batch");
  require(windows.size() == speaker_indices.size(), ErrorCode::ShapeMismatch,
          "labels do not match windows");
  const auto batch = static_cast<Eigen::Index>(windows.size());
  const Eigen::Index num_speakers = model.head->num_speakers();
  for (int s : speaker_indices) {
    require(s >= 0 && s < num_speakers, ErrorCode::IndexOutOfRange,
            "speaker index out of range");
  }

  LstmCache cache;
  const Matrix emb = forward_batch(model, windows, &cache);
  Matrix logits = emb * model.head->w.transpose();
  logits.rowwise() += model.head->b.transpose();
  const Matrix logp = log_softmax_rows(logits);

  double loss = 0.0;
  for (Eigen::Index r = 0; r < batch; ++r) {
    loss -= logp(r, speaker_indices[static_cast<size_t>(r)]);
  }
  loss /= static_cast<double>(batch);

  if (grads || d_inputs) {
    require(grads == nullptr || grads->head.has_value(), ErrorCode::StaleCache,
            "gradient sink lacks a head block");
    Matrix d_logits = logp.array().exp().matrix();  // softmax rows
    for (Eigen::Index r = 0; r < batch; ++r) {
      d_logits(r, speaker_indices[static_cast<size_t>(r)]) -= 1.0;
    }
    d_logits /= static_cast<double>(batch);

    const Matrix d_emb = d_logits * model.head->w;
    LstmGradients scratch;
    LstmGradients* sink = grads;
    if (!sink) {
      scratch = zero_gradients(model);
      sink = &scratch;
    }
    if (grads) {
      grads->head->w.noalias() += d_logits.transpose() * emb;
      grads->head->b.noalias() += d_logits.colwise().sum().transpose();
    }
    backward_batch(model, cache, d_emb, sink, d_inputs);
  }
  return loss;
}

ContrastiveBatchStats contrastive_loss_batch(const LstmModel& model,
                                             const std::vector<Matrix>& windows,
                                             const std::vector<PairRef>& pairs,
                                             const ContrastiveConfig& cfg,
                                             LstmGradients* grads,
                                             std::vector<Matrix>* d_inputs) {
  cfg.validate();
  require(!pairs.empty(), ErrorCode::EmptyBatch, "empty pair batch");
  const auto num_windows = static_cast<int>(windows.size());
  for (const PairRef& p : pairs) {
    require(p.first >= 0 && p.first < num_windows && p.second >= 0 &&
                p.second < num_windows,
            ErrorCode::IndexOutOfRange, "pair reference out of range");
  }

  LstmCache cache;
  const Matrix emb = forward_batch(model, windows, &cache);
  const double n = static_cast<double>(pairs.size());

  ContrastiveBatchStats stats;
  Matrix d_emb = Matrix::Zero(emb.rows(), emb.cols());
  double genuine_sum = 0.0, impostor_sum = 0.0;
  int genuine_count = 0, impostor_count = 0;

  for (const PairRef& p : pairs) {
    const auto a = static_cast<Eigen::Index>(p.first);
    const auto b = static_cast<Eigen::Index>(p.second);
    const Eigen::RowVectorXd diff = emb.row(a) - emb.row(b);
    const double dist = diff.norm();

    if (p.label == 1) {
      stats.loss += 0.5 * dist * dist / n;
      genuine_sum += dist;
      ++genuine_count;
      d_emb.row(a) += diff / n;
      d_emb.row(b) -= diff / n;
    } else {
      const double gap = cfg.margin - dist;
      if (gap > 0.0) {
        stats.loss += 0.5 * gap * gap / n;
        // d(0.5*(M-D)^2)/dD = -(M-D); dD/de_a = diff / D
        const double coef = -gap / std::max(dist, kDistanceEps) / n;
        d_emb.row(a) += coef * diff;
        d_emb.row(b) -= coef * diff;
      }
      impostor_sum += dist;
      ++impostor_count;
    }
  }
  stats.loss += regularizer_loss(model, cfg.lambda);
  stats.mean_genuine_distance =
      genuine_count > 0 ? genuine_sum / genuine_count : 0.0;
  stats.mean_impostor_distance =
      impostor_count > 0 ? impostor_sum / impostor_count : 0.0;

  if (grads || d_inputs) {
    LstmGradients scratch;
    LstmGradients* sink = grads;
    if (!sink) {
      scratch = zero_gradients(model);
      sink = &scratch;
    }
    backward_batch(model, cache, d_emb, sink, d_inputs);
    if (grads) add_regularizer_gradients(model, cfg.lambda, grads);
  }
  return stats;
}

double contrastive_loss(const LstmModel& model,
                        const std::vector<TrialPair>& batch,
                        const ContrastiveConfig& cfg) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "empty pair batch");
  std::vector<Matrix> windows;
  std::vector<PairRef> refs;
  windows.reserve(batch.size() * 2);
  refs.reserve(batch.size());
  for (const TrialPair& pair : batch) {
    const int a = static_cast<int>(windows.size());
    windows.push_back(pair.x1);
    windows.push_back(pair.x2);
    refs.push_back({a, a + 1, pair.label});
  }
  return contrastive_loss_batch(model, windows, refs, cfg).loss;
}

}  // namespace sv
