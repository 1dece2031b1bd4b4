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

#include "sv/training.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "sv/error.hpp"

namespace sv {

namespace {

// Parameter and gradient views for everything a phase optimizes: the
// trunk (and head, when present) followed by batch-norm scale/shift.
std::vector<Eigen::Map<Vector>> net_views(SpeakerNet& net) {
  auto views = parameter_views(net.lstm);
  if (net.input_norm) {
    views.emplace_back(net.input_norm->gamma.data(), net.input_norm->gamma.size());
    views.emplace_back(net.input_norm->beta.data(), net.input_norm->beta.size());
  }
  return views;
}

std::vector<Eigen::Map<Vector>> grad_views(LstmGradients& grads,
                                           BatchNormGrads* bn_grads) {
  auto views = gradient_views(grads);
  if (bn_grads) {
    views.emplace_back(bn_grads->gamma.data(), bn_grads->gamma.size());
    views.emplace_back(bn_grads->beta.data(), bn_grads->beta.size());
  }
  return views;
}

void zero_all(std::vector<Eigen::Map<Vector>> views) {
  for (auto& v : views) v.setZero();
}

// Shuffled index batches. A trailing singleton is folded into the
// previous batch so batch normalization always sees at least two windows.
std::vector<std::vector<int>> make_batches(int n, int batch_size,
                                           std::mt19937_64& rng) {
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += batch_size) {
    const int stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + stop);
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

int count_speakers(const std::vector<DevUtterance>& dev) {
  std::set<int> speakers;
  for (const auto& u : dev) speakers.insert(u.speaker);
  return static_cast<int>(speakers.size());
}

}  // namespace

const char* phase_name(TrainPhase phase) {
  return phase == TrainPhase::kPretrain ? "pretrain" : "finetune";
}

void TrainConfig::validate() const {
  require(learning_rate >= 0, ErrorCode::BadConfig,
          "learning rate must be nonnegative");
  require(momentum >= 0 && momentum < 1, ErrorCode::BadConfig,
          "momentum must be in [0, 1)");
  require(batch_size >= 1, ErrorCode::BadConfig, "batch size must be >= 1");
  require(phase != TrainPhase::kFinetune || batch_size >= 2,
          ErrorCode::BadConfig, "fine-tuning needs batch size >= 2");
  require(epochs >= 0, ErrorCode::BadConfig, "epochs must be nonnegative");
  require(!pair_selection || th0 > 0, ErrorCode::BadConfig,
          "th0 must be positive when pair selection is on");
  require(frames_per_second > 0, ErrorCode::BadConfig,
          "frames_per_second must be positive");
  require(crop_frames() >= 2, ErrorCode::BadConfig,
          "crop shorter than 2 frames");
  contrastive.validate();
}

Matrix random_crop(const Matrix& utterance_features, int crop_frames,
                   std::mt19937_64& rng) {
  require(crop_frames >= 2, ErrorCode::BadConfig, "crop shorter than 2 frames");
  require(utterance_features.rows() >= crop_frames,
          ErrorCode::UtteranceTooShort,
          "utterance shorter than the crop length");
  const auto max_start =
      static_cast<int>(utterance_features.rows()) - crop_frames;
  std::uniform_int_distribution<int> dist(0, max_start);
  const int offset = dist(rng);
  return normalize_features(utterance_features.middleRows(offset, crop_frames));
}

FeatureWindow random_crop(const Waveform& w, const FeatureConfig& cfg,
                          double duration_s, std::mt19937_64& rng) {
  cfg.validate(w.sample_rate);
  const auto needed =
      static_cast<Eigen::Index>(std::lround(duration_s * w.sample_rate));
  require(w.samples.size() >= needed, ErrorCode::UtteranceTooShort,
          "utterance shorter than the crop length");
  const Eigen::Index hop = cfg.hop_samples(w.sample_rate);
  const auto max_offset = static_cast<int>((w.samples.size() - needed) / hop);
  std::uniform_int_distribution<int> dist(0, max_offset);
  const Eigen::Index start = static_cast<Eigen::Index>(dist(rng)) * hop;

  Waveform crop;
  crop.sample_rate = w.sample_rate;
  crop.samples = w.samples.segment(start, needed);
  return extract_window(crop, cfg, duration_s);
}

PairSelection select_pairs(const PairPool& pool, double th0) {
  require(pool.pairs.size() == pool.distances.size(), ErrorCode::BadConfig,
          "pool distances do not match pairs");
  require(th0 > 0, ErrorCode::BadConfig, "th0 must be positive");

  double max_gen = -std::numeric_limits<double>::infinity();
  double min_gen = std::numeric_limits<double>::infinity();
  int num_genuine = 0;
  for (size_t i = 0; i < pool.pairs.size(); ++i) {
    if (pool.pairs[i].label == 1) {
      max_gen = std::max(max_gen, pool.distances[i]);
      min_gen = std::min(min_gen, pool.distances[i]);
      ++num_genuine;
    }
  }
  require(num_genuine > 0, ErrorCode::NoGenuinePairs,
          "pair selection needs at least one genuine pair");

  PairSelection sel;
  sel.max_genuine = max_gen;
  sel.min_genuine = min_gen;
  const double th = th0 * std::abs(max_gen / std::max(min_gen, 1e-9));
  sel.threshold = max_gen + th;

  int num_impostor = 0, discarded = 0;
  for (size_t i = 0; i < pool.pairs.size(); ++i) {
    if (pool.pairs[i].label == 1) {
      sel.kept.push_back(static_cast<int>(i));
      continue;
    }
    ++num_impostor;
    if (pool.distances[i] > sel.threshold) {
      ++discarded;
    } else {
      sel.kept.push_back(static_cast<int>(i));
    }
  }
  sel.discard_rate =
      num_impostor > 0 ? static_cast<double>(discarded) / num_impostor : 0.0;
  return sel;
}

void SgdMomentum::step(std::vector<Eigen::Map<Vector>> params,
                       std::vector<Eigen::Map<Vector>> grads) {
  require(params.size() == grads.size(), ErrorCode::ShapeMismatch,
          "parameter/gradient view mismatch");
  if (velocity_.empty()) {
    for (const auto& p : params) velocity_.push_back(Vector::Zero(p.size()));
  }
  require(velocity_.size() == params.size(), ErrorCode::ShapeMismatch,
          "optimizer state does not match parameters");
  for (size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] - learning_rate_ * grads[i];
    params[i] += velocity_[i];
  }
}

std::vector<EpochLog> pretrain(SpeakerNet& net,
                               const std::vector<DevUtterance>& dev,
                               int num_speakers, const TrainConfig& cfg) {
  cfg.validate();
  require(!dev.empty(), ErrorCode::EmptyBatch, "no development utterances");
  for (const auto& u : dev) {
    require(u.speaker >= 0 && u.speaker < num_speakers,
            ErrorCode::IndexOutOfRange, "speaker index outside head range");
  }
  if (!net.lstm.head || net.lstm.head->num_speakers() != num_speakers) {
    attach_softmax_head(net.lstm, num_speakers,
                        cfg.seed ^ 0x9e3779b97f4a7c15ull);
  }
  if (cfg.batchnorm && !net.input_norm) {
    net.input_norm = BatchNorm(net.lstm.config.input_dim);
  }
  if (!cfg.batchnorm) net.input_norm.reset();

  std::mt19937_64 rng(cfg.seed);
  SgdMomentum optimizer(cfg.learning_rate, cfg.momentum);
  LstmGradients grads = zero_gradients(net.lstm);
  BatchNormGrads bn_grads;
  if (net.input_norm) {
    bn_grads.gamma = Vector::Zero(net.input_norm->dim());
    bn_grads.beta = Vector::Zero(net.input_norm->dim());
  }

  const int n = static_cast<int>(dev.size());
  const int crop_frames = cfg.crop_frames();
  std::vector<EpochLog> log;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Matrix> crops;
    crops.reserve(static_cast<size_t>(n));
    for (const auto& u : dev) crops.push_back(random_crop(u.features, crop_frames, rng));

    double loss_sum = 0.0;
    for (const auto& batch : make_batches(n, cfg.batch_size, rng)) {
      std::vector<Matrix> windows;
      std::vector<int> labels;
      for (int idx : batch) {
        windows.push_back(crops[static_cast<size_t>(idx)]);
        labels.push_back(dev[static_cast<size_t>(idx)].speaker);
      }

      zero_all(grad_views(grads, net.input_norm ? &bn_grads : nullptr));
      double loss = 0.0;
      if (net.input_norm) {
        BatchNorm::Cache bn_cache;
        const auto normed = net.input_norm->forward_train(windows, &bn_cache);
        std::vector<Matrix> d_inputs;
        loss = softmax_loss_batch(net.lstm, normed, labels, &grads, &d_inputs);
        net.input_norm->backward(bn_cache, d_inputs, &bn_grads.gamma,
                                 &bn_grads.beta);
      } else {
        loss = softmax_loss_batch(net.lstm, windows, labels, &grads);
      }
      loss_sum += loss * static_cast<double>(batch.size());
      optimizer.step(net_views(net),
                     grad_views(grads, net.input_norm ? &bn_grads : nullptr));
    }

    EpochLog row;
    row.epoch = epoch;
    row.phase = TrainPhase::kPretrain;
    row.loss = loss_sum / n;
    log.push_back(row);
  }
  return log;
}

std::vector<EpochLog> finetune(SpeakerNet& net,
                               const std::vector<DevUtterance>& dev,
                               const TrainConfig& cfg) {
  cfg.validate();
  require(!dev.empty(), ErrorCode::EmptyBatch, "no development utterances");
  require(count_speakers(dev) >= 2, ErrorCode::BadConfig,
          "fine-tuning needs at least two dev speakers");

  // The classification head is not part of the verification network.
  net.lstm.head.reset();
  if (cfg.batchnorm && !net.input_norm) {
    net.input_norm = BatchNorm(net.lstm.config.input_dim);
  }
  if (!cfg.batchnorm) net.input_norm.reset();

  std::mt19937_64 rng(cfg.seed);
  SgdMomentum optimizer(cfg.learning_rate, cfg.momentum);
  LstmGradients grads = zero_gradients(net.lstm);
  BatchNormGrads bn_grads;
  if (net.input_norm) {
    bn_grads.gamma = Vector::Zero(net.input_norm->dim());
    bn_grads.beta = Vector::Zero(net.input_norm->dim());
  }

  const int n = static_cast<int>(dev.size());
  const int crop_frames = cfg.crop_frames();
  std::vector<EpochLog> log;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Matrix> crops;
    crops.reserve(static_cast<size_t>(n));
    for (const auto& u : dev) crops.push_back(random_crop(u.features, crop_frames, rng));

    // Candidate pool: every same-speaker crop pair, plus an equal number
    // of uniformly sampled cross-speaker pairs.
    PairPool pool;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (dev[static_cast<size_t>(i)].speaker ==
            dev[static_cast<size_t>(j)].speaker) {
          pool.pairs.push_back({i, j, 1});
        }
      }
    }
    require(!pool.pairs.empty(), ErrorCode::NoGenuinePairs,
            "no genuine pairs in the dev set");
    const int num_genuine = static_cast<int>(pool.pairs.size());
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int k = 0; k < num_genuine; ++k) {
      int a = pick(rng), b = pick(rng);
      while (dev[static_cast<size_t>(a)].speaker ==
             dev[static_cast<size_t>(b)].speaker) {
        a = pick(rng);
        b = pick(rng);
      }
      pool.pairs.push_back({a, b, 0});
    }

    // Frozen-model distances for the Algorithm-1 filter and the log.
    const Matrix emb = embed_batch(net, crops);
    pool.distances.resize(pool.pairs.size());
    double gen_sum = 0.0, imp_sum = 0.0;
    for (size_t p = 0; p < pool.pairs.size(); ++p) {
      const auto& pr = pool.pairs[p];
      pool.distances[p] = (emb.row(pr.first) - emb.row(pr.second)).norm();
      (pr.label == 1 ? gen_sum : imp_sum) += pool.distances[p];
    }

    PairSelection selection;
    if (cfg.pair_selection) {
      selection = select_pairs(pool, cfg.th0);
      bool any_impostor = false;
      for (int k : selection.kept) {
        if (pool.pairs[static_cast<size_t>(k)].label == 0) {
          any_impostor = true;
          break;
        }
      }
      require(any_impostor, ErrorCode::NoPairsSurvive,
              "pair selection discarded every impostor pair");
    } else {
      selection.kept.resize(pool.pairs.size());
      std::iota(selection.kept.begin(), selection.kept.end(), 0);
      selection.discard_rate = 0.0;
    }

    const int num_kept = static_cast<int>(selection.kept.size());
    double loss_sum = 0.0;
    for (const auto& batch : make_batches(num_kept, cfg.batch_size, rng)) {
      // Remap the batch onto its unique crop windows.
      std::vector<int> local_of_crop(static_cast<size_t>(n), -1);
      std::vector<Matrix> windows;
      std::vector<PairRef> refs;
      auto local_index = [&](int crop_idx) {
        int& slot = local_of_crop[static_cast<size_t>(crop_idx)];
        if (slot < 0) {
          slot = static_cast<int>(windows.size());
          windows.push_back(crops[static_cast<size_t>(crop_idx)]);
        }
        return slot;
      };
      for (int sel_idx : batch) {
        const PairRef& pr =
            pool.pairs[static_cast<size_t>(selection.kept[static_cast<size_t>(sel_idx)])];
        refs.push_back({local_index(pr.first), local_index(pr.second), pr.label});
      }

      zero_all(grad_views(grads, net.input_norm ? &bn_grads : nullptr));
      ContrastiveBatchStats stats;
      if (net.input_norm) {
        BatchNorm::Cache bn_cache;
        const auto normed = net.input_norm->forward_train(windows, &bn_cache);
        std::vector<Matrix> d_inputs;
        stats = contrastive_loss_batch(net.lstm, normed, refs, cfg.contrastive,
                                       &grads, &d_inputs);
        net.input_norm->backward(bn_cache, d_inputs, &bn_grads.gamma,
                                 &bn_grads.beta);
      } else {
        stats = contrastive_loss_batch(net.lstm, windows, refs,
                                       cfg.contrastive, &grads);
      }
      loss_sum += stats.loss * static_cast<double>(refs.size());
      optimizer.step(net_views(net),
                     grad_views(grads, net.input_norm ? &bn_grads : nullptr));
    }

    EpochLog row;
    row.epoch = epoch;
    row.phase = TrainPhase::kFinetune;
    row.loss = loss_sum / num_kept;
    row.genuine_mean_distance = gen_sum / num_genuine;
    row.impostor_mean_distance = imp_sum / num_genuine;
    row.discard_rate = selection.discard_rate;
    log.push_back(row);
  }
  return log;
}

void write_train_log(const std::string& path,
                     const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path);
  out << "epoch,phase,loss,genuine_mean_D,impostor_mean_D,discard_rate\n";
  char buf[64];
  auto fmt = [&buf](double v) -> std::string {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
  };
  for (const auto& row : log) {
    out << row.epoch << ',' << phase_name(row.phase) << ',' << fmt(row.loss)
        << ',' << fmt(row.genuine_mean_distance) << ','
        << fmt(row.impostor_mean_distance) << ',' << fmt(row.discard_rate)
        << '\n';
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

}  // namespace sv
