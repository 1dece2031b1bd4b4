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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "support/synth.hpp"
#include "support/test_util.hpp"
#include "sv/error.hpp"

namespace {

// Independent restatement of the impostor filter used as the oracle.
std::vector<int> select_pairs_oracle(const sv::PairPool& pool, double th0) {
  double max_gen = -1e300, min_gen = 1e300;
  for (size_t i = 0; i < pool.pairs.size(); ++i) {
    if (pool.pairs[i].label == 1) {
      max_gen = std::max(max_gen, pool.distances[i]);
      min_gen = std::min(min_gen, pool.distances[i]);
    }
  }
  const double th = th0 * std::abs(max_gen / std::max(min_gen, 1e-9));
  std::vector<int> kept;
  for (size_t i = 0; i < pool.pairs.size(); ++i) {
    if (pool.pairs[i].label == 1 || pool.distances[i] <= max_gen + th) {
      kept.push_back(static_cast<int>(i));
    }
  }
  return kept;
}

sv::PairPool random_pool(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 40);
  std::uniform_real_distribution<double> dist(0.0, 12.0);
  std::bernoulli_distribution genuine(0.5);
  sv::PairPool pool;
  const int n = count(rng);
  bool has_genuine = false;
  for (int i = 0; i < n; ++i) {
    const int label = genuine(rng) ? 1 : 0;
    has_genuine |= label == 1;
    pool.pairs.push_back({0, 1, label});
    pool.distances.push_back(dist(rng));
  }
  if (!has_genuine) {
    pool.pairs.push_back({0, 1, 1});
    pool.distances.push_back(dist(rng));
  }
  return pool;
}

sv::TrainConfig base_config(sv::TrainPhase phase) {
  sv::TrainConfig cfg;
  cfg.phase = phase;
  cfg.frames_per_second = 100;
  cfg.crop_duration_s = 1.0;
  return cfg;
}

}  // namespace

TEST_CASE("random_crop of an exact-length utterance is the full window") {
  std::mt19937_64 data_rng(1), rng(2);
  const sv::Matrix features = svtest::random_matrix(100, 8, data_rng);
  const sv::Matrix crop = sv::random_crop(features, 100, rng);
  CHECK((crop - sv::normalize_features(features)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("random_crop is deterministic under a fixed seed") {
  std::mt19937_64 data_rng(3);
  const sv::Matrix features = svtest::random_matrix(300, 8, data_rng);
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 10; ++i) {
    CHECK(sv::random_crop(features, 100, a) == sv::random_crop(features, 100, b));
  }
}

TEST_CASE("random_crop offsets are uniform over valid starts") {
  // 300-frame utterance, 100-frame crop: 201 valid starts.
  std::mt19937_64 data_rng(4);
  sv::Matrix features = svtest::random_matrix(300, 2, data_rng);
  // Make the first column encode the row index so the offset is readable
  // from the crop before normalization is applied to column 1 only.
  for (int t = 0; t < 300; ++t) features(t, 0) = t;

  std::mt19937_64 rng(7);
  std::vector<int> histogram(201, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    std::mt19937_64 probe = rng;  // same state the crop will consume
    std::uniform_int_distribution<int> dist(0, 200);
    const int offset = dist(probe);
    const sv::Matrix crop = sv::random_crop(features, 100, rng);
    (void)crop;
    ++histogram[static_cast<size_t>(offset)];
  }

  const double expected = draws / 201.0;
  const double sigma = std::sqrt(expected * (1.0 - 1.0 / 201.0));
  for (int bin = 0; bin < 201; ++bin) {
    CHECK(std::abs(histogram[static_cast<size_t>(bin)] - expected) <=
          3.0 * sigma);
  }
}

TEST_CASE("random_crop rejects too-short utterances") {
  std::mt19937_64 data_rng(5), rng(6);
  const sv::Matrix features = svtest::random_matrix(50, 8, data_rng);
  try {
    sv::random_crop(features, 100, rng);
    FAIL("expected UtteranceTooShort");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::UtteranceTooShort);
  }
}

TEST_CASE("waveform random_crop composes with extract_window") {
  const sv::Waveform w = svtest::make_sine(500.0, 1.0);
  sv::FeatureConfig cfg;
  std::mt19937_64 rng(7);
  const sv::FeatureWindow crop = sv::random_crop(w, cfg, 1.0, rng);
  const sv::FeatureWindow full = sv::extract_window(w, cfg, 1.0);
  CHECK(crop.values == full.values);  // only one valid offset
}

TEST_CASE("select_pairs reproduces the worked example") {
  sv::PairPool pool;
  pool.pairs = {{0, 1, 1}, {2, 3, 1}, {0, 2, 0}, {1, 3, 0}};
  pool.distances = {1.0, 2.0, 2.5, 10.0};
  const sv::PairSelection sel = sv::select_pairs(pool, 0.5);
  // th = 0.5 * (2.0 / 1.0) = 1.0; cutoff = 3.0: keep 2.5, discard 10.0.
  CHECK(sel.threshold == doctest::Approx(3.0));
  CHECK(sel.kept == std::vector<int>{0, 1, 2});
  CHECK(sel.discard_rate == doctest::Approx(0.5));
}

TEST_CASE("select_pairs keeps everything when impostors sit below max_gen") {
  sv::PairPool pool;
  pool.pairs = {{0, 1, 1}, {0, 2, 0}, {1, 2, 0}};
  pool.distances = {5.0, 4.0, 4.9};
  const sv::PairSelection sel = sv::select_pairs(pool, 0.01);
  CHECK(sel.kept.size() == 3);
  CHECK(sel.discard_rate == 0.0);
}

TEST_CASE("select_pairs guards a zero minimum genuine distance") {
  sv::PairPool pool;
  pool.pairs = {{0, 1, 1}, {2, 3, 1}, {0, 2, 0}};
  pool.distances = {0.0, 2.0, 100.0};
  const sv::PairSelection sel = sv::select_pairs(pool, 0.5);
  CHECK(std::isfinite(sel.threshold));
  // th = 0.5 * 2/1e-9 = 1e9: everything survives.
  CHECK(sel.kept.size() == 3);
}

TEST_CASE("select_pairs matches an independent reimplementation") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const sv::PairPool pool = random_pool(rng);
    const double th0 = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
    const sv::PairSelection sel = sv::select_pairs(pool, th0);
    CHECK(sel.kept == select_pairs_oracle(pool, th0));
    for (int k : sel.kept) (void)k;
    // Genuine pairs are never discarded.
    for (size_t i = 0; i < pool.pairs.size(); ++i) {
      if (pool.pairs[i].label == 1) {
        CHECK(std::find(sel.kept.begin(), sel.kept.end(),
                        static_cast<int>(i)) != sel.kept.end());
      }
    }
  }
}

TEST_CASE("select_pairs needs a genuine pair") {
  sv::PairPool pool;
  pool.pairs = {{0, 1, 0}};
  pool.distances = {1.0};
  try {
    sv::select_pairs(pool, 1.0);
    FAIL("expected NoGenuinePairs");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::NoGenuinePairs);
  }
}

TEST_CASE("pretraining separates well-separated synthetic speakers") {
  std::mt19937_64 rng(11);
  const auto dev = svtest::feature_dev_set(5, 8, 220, 12, 0.2, rng);

  sv::SpeakerNet net;
  net.lstm = sv::init_lstm({12, 24, 2}, 1);

  sv::TrainConfig cfg = base_config(sv::TrainPhase::kPretrain);
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.05;
  cfg.seed = 5;

  // The uniform-softmax baseline for 5 balanced speakers is ln 5.
  const auto log = sv::pretrain(net, dev, 5, cfg);
  REQUIRE(log.size() == 30);
  CHECK(log.front().loss < std::log(5.0) + 0.05);
  CHECK(log.back().loss < 0.1 * std::log(5.0));
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  std::mt19937_64 rng(13);
  const auto dev = svtest::feature_dev_set(3, 4, 150, 6, 0.3, rng);

  sv::SpeakerNet net;
  net.lstm = sv::init_lstm({6, 8, 2}, 2);
  sv::attach_softmax_head(net.lstm, 3, 3);
  const sv::LstmModel before = net.lstm;

  sv::TrainConfig cfg = base_config(sv::TrainPhase::kPretrain);
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.0;
  cfg.batchnorm = false;
  sv::pretrain(net, dev, 3, cfg);

  for (size_t l = 0; l < before.layers.size(); ++l) {
    CHECK(net.lstm.layers[l].wx == before.layers[l].wx);
    CHECK(net.lstm.layers[l].wh == before.layers[l].wh);
    CHECK(net.lstm.layers[l].b == before.layers[l].b);
  }
  CHECK(net.lstm.head->w == before.head->w);
}

TEST_CASE("training is deterministic under a fixed seed") {
  std::mt19937_64 rng(17);
  const auto dev = svtest::feature_dev_set(3, 4, 150, 6, 0.3, rng);

  auto run = [&]() {
    sv::SpeakerNet net;
    net.lstm = sv::init_lstm({6, 8, 2}, 21);
    sv::TrainConfig cfg = base_config(sv::TrainPhase::kPretrain);
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.05;
    cfg.seed = 99;
    const auto log = sv::pretrain(net, dev, 3, cfg);

    sv::TrainConfig fcfg = base_config(sv::TrainPhase::kFinetune);
    fcfg.epochs = 2;
    fcfg.batch_size = 4;
    fcfg.learning_rate = 0.02;
    fcfg.seed = 100;
    const auto flog = sv::finetune(net, dev, fcfg);
    return std::make_tuple(net, log, flog);
  };

  const auto [net_a, log_a, flog_a] = run();
  const auto [net_b, log_b, flog_b] = run();
  for (size_t i = 0; i < log_a.size(); ++i) {
    CHECK(log_a[i].loss == log_b[i].loss);
  }
  for (size_t i = 0; i < flog_a.size(); ++i) {
    CHECK(flog_a[i].loss == flog_b[i].loss);
    CHECK(flog_a[i].genuine_mean_distance == flog_b[i].genuine_mean_distance);
  }
  for (size_t l = 0; l < net_a.lstm.layers.size(); ++l) {
    CHECK(net_a.lstm.layers[l].wx == net_b.lstm.layers[l].wx);
  }
}

TEST_CASE("fine-tuning pulls genuine pairs below impostor pairs") {
  std::mt19937_64 rng(23);
  const auto dev = svtest::feature_dev_set(4, 6, 220, 10, 0.35, rng);
  const auto held_out = svtest::feature_dev_set(4, 2, 220, 10, 0.35, rng);

  sv::SpeakerNet net;
  net.lstm = sv::init_lstm({10, 14, 2}, 31);
  sv::TrainConfig pcfg = base_config(sv::TrainPhase::kPretrain);
  pcfg.epochs = 15;
  pcfg.batch_size = 8;
  pcfg.learning_rate = 0.1;
  pcfg.seed = 32;
  sv::pretrain(net, dev, 4, pcfg);

  sv::TrainConfig fcfg = base_config(sv::TrainPhase::kFinetune);
  fcfg.epochs = 12;
  fcfg.batch_size = 8;
  fcfg.learning_rate = 0.03;
  fcfg.seed = 33;
  const auto log = sv::finetune(net, dev, fcfg);
  CHECK_FALSE(net.lstm.head.has_value());
  CHECK(log.back().genuine_mean_distance < log.back().impostor_mean_distance);

  // Held-out crops from the same speakers separate as well.
  std::mt19937_64 crop_rng(34);
  std::vector<sv::Matrix> crops;
  std::vector<int> speakers;
  for (const auto& u : held_out) {
    crops.push_back(sv::random_crop(u.features, 100, crop_rng));
    speakers.push_back(u.speaker);
  }
  const sv::Matrix emb = sv::embed_batch(net, crops);
  double gen_sum = 0.0, imp_sum = 0.0;
  int gen_n = 0, imp_n = 0;
  for (size_t i = 0; i < crops.size(); ++i) {
    for (size_t j = i + 1; j < crops.size(); ++j) {
      const double d = (emb.row(static_cast<Eigen::Index>(i)) -
                        emb.row(static_cast<Eigen::Index>(j)))
                           .norm();
      if (speakers[i] == speakers[j]) {
        gen_sum += d;
        ++gen_n;
      } else {
        imp_sum += d;
        ++imp_n;
      }
    }
  }
  REQUIRE(gen_n > 0);
  REQUIRE(imp_n > 0);
  CHECK(gen_sum / gen_n < imp_sum / imp_n);
}

TEST_CASE("pair selection off matches an infinite threshold bitwise") {
  std::mt19937_64 rng(41);
  const auto dev = svtest::feature_dev_set(3, 4, 180, 8, 0.3, rng);

  auto finetuned = [&](bool selection, double th0) {
    sv::SpeakerNet net;
    net.lstm = sv::init_lstm({8, 10, 2}, 51);
    sv::TrainConfig pcfg = base_config(sv::TrainPhase::kPretrain);
    pcfg.epochs = 3;
    pcfg.batch_size = 6;
    pcfg.seed = 52;
    sv::pretrain(net, dev, 3, pcfg);

    sv::TrainConfig fcfg = base_config(sv::TrainPhase::kFinetune);
    fcfg.epochs = 4;
    fcfg.batch_size = 6;
    fcfg.learning_rate = 0.02;
    fcfg.seed = 53;
    fcfg.pair_selection = selection;
    fcfg.th0 = th0;
    sv::finetune(net, dev, fcfg);
    return net;
  };

  const sv::SpeakerNet off = finetuned(false, 1.0);
  const sv::SpeakerNet inf = finetuned(true, 1e30);
  for (size_t l = 0; l < off.lstm.layers.size(); ++l) {
    CHECK(off.lstm.layers[l].wx == inf.lstm.layers[l].wx);
    CHECK(off.lstm.layers[l].wh == inf.lstm.layers[l].wh);
    CHECK(off.lstm.layers[l].b == inf.lstm.layers[l].b);
  }
}

TEST_CASE("a dominant regularizer shrinks the trunk weights") {
  std::mt19937_64 rng(61);
  const auto dev = svtest::feature_dev_set(3, 4, 180, 8, 0.3, rng);

  sv::SpeakerNet net;
  net.lstm = sv::init_lstm({8, 10, 2}, 71);
  sv::TrainConfig pcfg = base_config(sv::TrainPhase::kPretrain);
  pcfg.epochs = 2;
  pcfg.batch_size = 6;
  pcfg.seed = 72;
  sv::pretrain(net, dev, 3, pcfg);

  double norm_before = 0.0;
  for (const sv::Matrix* w : sv::trunk_weight_matrices(net.lstm)) {
    norm_before += w->squaredNorm();
  }

  sv::TrainConfig fcfg = base_config(sv::TrainPhase::kFinetune);
  fcfg.epochs = 6;
  fcfg.batch_size = 6;
  fcfg.learning_rate = 1e-4;
  fcfg.seed = 73;
  fcfg.contrastive.lambda = 1e3;
  sv::finetune(net, dev, fcfg);

  double norm_after = 0.0;
  for (const sv::Matrix* w : sv::trunk_weight_matrices(net.lstm)) {
    norm_after += w->squaredNorm();
  }
  CHECK(norm_after < norm_before);
}

TEST_CASE("epoch zero training is a no-op") {
  std::mt19937_64 rng(81);
  const auto dev = svtest::feature_dev_set(3, 4, 150, 6, 0.3, rng);
  sv::SpeakerNet net;
  net.lstm = sv::init_lstm({6, 8, 2}, 91);
  const sv::Matrix wx_before = net.lstm.layers[0].wx;

  sv::TrainConfig cfg = base_config(sv::TrainPhase::kPretrain);
  cfg.epochs = 0;
  const auto log = sv::pretrain(net, dev, 3, cfg);
  CHECK(log.empty());
  CHECK(net.lstm.layers[0].wx == wx_before);
}
