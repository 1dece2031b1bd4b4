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

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sv/commands.hpp"
#include "sv/error.hpp"

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, momentum, th0, margin, lambda, duration;
  std::optional<int> batch_size, epochs, hidden_dim, num_layers, mixtures;
  std::optional<double> relevance;
  std::optional<double> vad_threshold;
  bool no_pair_selection = false;
  bool no_batchnorm = false;
  bool normalize_dvector = false;
};

sv::RunConfig resolve_config(const Overrides& o) {
  sv::RunConfig cfg = sv::load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.lr) cfg.train.learning_rate = *o.lr;
  if (o.momentum) cfg.train.momentum = *o.momentum;
  if (o.th0) cfg.train.th0 = *o.th0;
  if (o.margin) cfg.train.margin = *o.margin;
  if (o.lambda) cfg.train.lambda = *o.lambda;
  if (o.duration) {
    cfg.train.duration_s = *o.duration;
    cfg.eval.duration_s = *o.duration;
  }
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.hidden_dim) cfg.lstm.hidden_dim = *o.hidden_dim;
  if (o.num_layers) cfg.lstm.num_layers = *o.num_layers;
  if (o.mixtures) cfg.gmm.mixtures = *o.mixtures;
  if (o.relevance) cfg.gmm.relevance_factor = *o.relevance;
  if (o.vad_threshold) cfg.vad.threshold_db = *o.vad_threshold;
  if (o.no_pair_selection) cfg.train.pair_selection = false;
  if (o.no_batchnorm) cfg.train.batchnorm = false;
  if (o.normalize_dvector) cfg.eval.normalize_dvector = true;
  return cfg;
}

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--seed", o.seed, "RNG seed")->envname("SV_SEED");
  cmd->add_option("--duration", o.duration, "crop/evaluation duration (s)");
  cmd->add_option("--vad-threshold", o.vad_threshold,
                  "VAD energy gate below the loudest frame (dB)");
}

void add_train_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--momentum", o.momentum, "SGD momentum");
  cmd->add_option("--batch-size", o.batch_size, "minibatch size");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--hidden-dim", o.hidden_dim, "LSTM hidden units per layer");
  cmd->add_option("--num-layers", o.num_layers, "LSTM layers");
  cmd->add_option("--margin", o.margin, "contrastive margin M");
  cmd->add_option("--lambda", o.lambda, "L2 regularization coefficient");
  cmd->add_option("--th0", o.th0, "pair-selection base threshold");
  cmd->add_flag("--no-pair-selection", o.no_pair_selection,
                "disable the impostor-pair filter");
  cmd->add_flag("--no-batchnorm", o.no_batchnorm,
                "disable input batch normalization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svkit - text-independent speaker verification toolkit"};
  app.require_subcommand(1);
  Overrides o;

  std::string manifest, out_dir, checkpoint, trials, speakers_file;
  std::string speaker_id, wav_path, system = "lstm", mode = "log_filterbank";
  std::optional<std::string> init_ckpt, feature_cache, prefix_rule;
  std::vector<double> durations;
  double threshold = 0.0;

  auto* extract = app.add_subcommand("extract", "extract features to a cache");
  extract->add_option("--manifest", manifest)->required();
  extract->add_option("--out", out_dir)->required();
  extract->add_option("--prefix-rule", prefix_rule,
                      "speaker-id prefix marking the eval split");
  extract->add_option("--mode", mode)
      ->check(CLI::IsMember({"log_filterbank", "mfcc"}));
  add_common_options(extract, o);

  auto* pre = app.add_subcommand("pretrain", "softmax pretraining");
  pre->add_option("--manifest", manifest)->required();
  pre->add_option("--out", out_dir)->required();
  pre->add_option("--feature-cache", feature_cache);
  pre->add_option("--prefix-rule", prefix_rule);
  add_common_options(pre, o);
  add_train_options(pre, o);

  auto* fin = app.add_subcommand("finetune", "siamese contrastive fine-tuning");
  fin->add_option("--manifest", manifest)->required();
  fin->add_option("--out", out_dir)->required();
  fin->add_option("--init", init_ckpt, "pretrained checkpoint")->required();
  fin->add_option("--feature-cache", feature_cache);
  fin->add_option("--prefix-rule", prefix_rule);
  add_common_options(fin, o);
  add_train_options(fin, o);

  auto* enr = app.add_subcommand("enroll", "build speaker d-vectors");
  enr->add_option("--manifest", manifest)->required();
  enr->add_option("--checkpoint", checkpoint)->required();
  enr->add_option("--out", out_dir)->required();
  enr->add_option("--feature-cache", feature_cache);
  enr->add_flag("--normalize-dvector", o.normalize_dvector);
  add_common_options(enr, o);

  auto* ver = app.add_subcommand("verify", "score one trial");
  ver->add_option("--checkpoint", checkpoint)->required();
  ver->add_option("--speakers", speakers_file)->required();
  ver->add_option("--speaker", speaker_id)->required();
  ver->add_option("--wav", wav_path)->required();
  ver->add_option("--threshold", threshold, "accept when score >= threshold")
      ->required();
  ver->add_flag("--normalize-dvector", o.normalize_dvector);
  add_common_options(ver, o);

  auto* ev = app.add_subcommand("evaluate", "EER over a trial list");
  ev->add_option("--manifest", manifest)->required();
  ev->add_option("--trials", trials)->required();
  ev->add_option("--checkpoint", checkpoint)->required();
  ev->add_option("--out", out_dir)->required();
  ev->add_option("--system", system)->check(CLI::IsMember({"lstm", "gmm"}));
  ev->add_option("--feature-cache", feature_cache);
  ev->add_flag("--normalize-dvector", o.normalize_dvector);
  add_common_options(ev, o);

  auto* sweep = app.add_subcommand("sweep-duration",
                                   "train and evaluate per duration");
  sweep->add_option("--manifest", manifest)->required();
  sweep->add_option("--trials", trials)->required();
  sweep->add_option("--out", out_dir)->required();
  sweep->add_option("--durations", durations, "comma-separated seconds")
      ->required()
      ->delimiter(',');
  sweep->add_option("--feature-cache", feature_cache);
  add_common_options(sweep, o);
  add_train_options(sweep, o);

  auto* ubm = app.add_subcommand("train-ubm", "EM-train the background model");
  ubm->add_option("--manifest", manifest)->required();
  ubm->add_option("--out", out_dir)->required();
  ubm->add_option("--mixtures", o.mixtures, "mixture components");
  ubm->add_option("--feature-cache", feature_cache);
  add_common_options(ubm, o);

  auto* adapt = app.add_subcommand("adapt-speaker",
                                   "MAP-adapt enroll speakers from the UBM");
  adapt->add_option("--manifest", manifest)->required();
  adapt->add_option("--ubm", checkpoint)->required();
  adapt->add_option("--out", out_dir)->required();
  adapt->add_option("--relevance", o.relevance, "MAP relevance factor");
  adapt->add_option("--feature-cache", feature_cache);
  add_common_options(adapt, o);

  CLI11_PARSE(app, argc, argv);

  try {
    const sv::RunConfig cfg = resolve_config(o);
    if (extract->parsed()) {
      sv::ExtractArgs args{manifest, out_dir, prefix_rule,
                           mode == "mfcc" ? sv::FeatureMode::kMfcc
                                          : sv::FeatureMode::kLogFilterbank};
      return sv::cmd_extract(cfg, args);
    }
    if (pre->parsed()) {
      return sv::cmd_train(
          cfg, {manifest, out_dir, false, std::nullopt, feature_cache,
                prefix_rule});
    }
    if (fin->parsed()) {
      return sv::cmd_train(
          cfg, {manifest, out_dir, true, init_ckpt, feature_cache, prefix_rule});
    }
    if (enr->parsed()) {
      return sv::cmd_enroll(cfg, {manifest, checkpoint, out_dir, feature_cache});
    }
    if (ver->parsed()) {
      return sv::cmd_verify(
          cfg, {checkpoint, speakers_file, speaker_id, wav_path, threshold});
    }
    if (ev->parsed()) {
      return sv::cmd_evaluate(
          cfg, {manifest, trials, checkpoint, out_dir, system, feature_cache});
    }
    if (sweep->parsed()) {
      return sv::cmd_sweep_duration(
          cfg, {manifest, trials, out_dir, durations, feature_cache});
    }
    if (ubm->parsed()) {
      return sv::cmd_train_ubm(cfg, {manifest, out_dir, feature_cache});
    }
    if (adapt->parsed()) {
      return sv::cmd_adapt_speaker(cfg,
                                   {manifest, checkpoint, out_dir, feature_cache});
    }
  } catch (const sv::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
