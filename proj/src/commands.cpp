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

#include "sv/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sv/checkpoint.hpp"
#include "sv/error.hpp"
#include "sv/eval.hpp"
#include "sv/gmm.hpp"
#include "sv/manifest.hpp"
#include "sv/training.hpp"
#include "sv/wav.hpp"

namespace sv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Cache files are keyed by utterance path and front-end digest, so one
// cache directory can hold several front ends side by side.
std::string cache_file_name(const std::string& path, std::uint64_t digest) {
  char name[48];
  std::snprintf(name, sizeof(name), "%016" PRIx64 "_%016" PRIx64 ".svfeat",
                fnv1a(path), digest);
  return name;
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& section) {
  for (const auto& item : j.items()) {
    require(allowed.count(item.key()) > 0, ErrorCode::ParseError,
            "unknown config key '" + item.key() + "' in " + section);
  }
}

FeatureMode parse_mode(const std::string& s) {
  if (s == "log_filterbank") return FeatureMode::kLogFilterbank;
  if (s == "mfcc") return FeatureMode::kMfcc;
  throw Error(ErrorCode::ParseError, "unknown feature mode '" + s + "'");
}

const char* mode_name(FeatureMode mode) {
  return mode == FeatureMode::kMfcc ? "mfcc" : "log_filterbank";
}

json config_to_json(const RunConfig& cfg) {
  return json{
      {"sample_rate", cfg.sample_rate},
      {"seed", cfg.seed},
      {"vad", {{"threshold_db", cfg.vad.threshold_db}}},
      {"features",
       {{"window_ms", cfg.features.window_ms},
        {"hop_ms", cfg.features.hop_ms},
        {"num_filters", cfg.features.num_filters},
        {"num_ceps", cfg.features.num_ceps},
        {"fft_size", cfg.features.fft_size},
        {"mode", mode_name(cfg.features.mode)},
        {"log_floor", cfg.features.log_floor}}},
      {"lstm",
       {{"hidden_dim", cfg.lstm.hidden_dim},
        {"num_layers", cfg.lstm.num_layers}}},
      {"train",
       {{"learning_rate", cfg.train.learning_rate},
        {"momentum", cfg.train.momentum},
        {"batch_size", cfg.train.batch_size},
        {"epochs", cfg.train.epochs},
        {"duration_s", cfg.train.duration_s},
        {"pair_selection", cfg.train.pair_selection},
        {"th0", cfg.train.th0},
        {"batchnorm", cfg.train.batchnorm},
        {"margin", cfg.train.margin},
        {"lambda", cfg.train.lambda}}},
      {"gmm",
       {{"mixtures", cfg.gmm.mixtures},
        {"relevance_factor", cfg.gmm.relevance_factor}}},
      {"eval",
       {{"duration_s", cfg.eval.duration_s},
        {"normalize_dvector", cfg.eval.normalize_dvector}}}};
}

// ---- data loading -------------------------------------------------------

struct LoadedUtterance {
  ManifestEntry entry;
  Matrix features;  // un-normalized, whole post-VAD utterance
};

// wav -> VAD -> features; optionally served from / spilled to a cache
// directory keyed by the utterance path. Cached values are float32, so a
// cache miss is quantized the same way a later hit would be.
Matrix load_utterance_features(const std::string& path, const RunConfig& cfg,
                               FeatureMode mode,
                               const std::optional<std::string>& cache_dir) {
  const std::uint64_t digest = cfg.digest(mode);
  std::string cache_path;
  if (cache_dir) {
    cache_path =
        (fs::path(*cache_dir) / cache_file_name(path, digest)).string();
    if (fs::exists(cache_path)) {
      auto [features, stored_digest] = load_feature_cache(cache_path);
      require(stored_digest == digest, ErrorCode::DigestMismatch,
              "feature cache " + cache_path +
                  " was extracted with different settings");
      return features;
    }
  }

  const Waveform raw = load_wav(path);
  require(raw.sample_rate == cfg.sample_rate, ErrorCode::SampleRateMismatch,
          path + " has sample rate " + std::to_string(raw.sample_rate) +
              ", expected " + std::to_string(cfg.sample_rate));
  const Waveform voiced = apply_vad(raw, cfg.vad_config());
  Matrix features = compute_features(voiced, cfg.front_end(mode));
  if (cache_dir) {
    save_feature_cache(cache_path, digest, features);
    features = features.cast<float>().cast<double>();
  }
  return features;
}

// Normalized feature window covering the first `frames` rows.
Matrix head_window(const Matrix& features, int frames) {
  require(features.rows() >= frames, ErrorCode::UtteranceTooShort,
          "utterance shorter than the evaluation window");
  return normalize_features(features.topRows(frames));
}

std::vector<LoadedUtterance> load_split(const Manifest& manifest, Split split,
                                        const RunConfig& cfg, FeatureMode mode,
                                        const std::optional<std::string>& cache) {
  std::vector<LoadedUtterance> out;
  for (const ManifestEntry& e : manifest.split_entries(split)) {
    out.push_back({e, load_utterance_features(e.path, cfg, mode, cache)});
  }
  return out;
}

TrainConfig make_train_config(const RunConfig& cfg, TrainPhase phase) {
  TrainConfig tc;
  tc.phase = phase;
  tc.learning_rate = cfg.train.learning_rate;
  tc.momentum = cfg.train.momentum;
  tc.batch_size = cfg.train.batch_size;
  tc.epochs = cfg.train.epochs;
  tc.seed = cfg.seed;
  tc.crop_duration_s = cfg.train.duration_s;
  tc.pair_selection = cfg.train.pair_selection;
  tc.th0 = cfg.train.th0;
  tc.batchnorm = cfg.train.batchnorm;
  tc.contrastive.margin = cfg.train.margin;
  tc.contrastive.lambda = cfg.train.lambda;
  tc.frames_per_second = cfg.frames_per_second();
  return tc;
}

std::vector<DevUtterance> to_dev_set(const std::vector<LoadedUtterance>& dev,
                                     const std::vector<std::string>& speakers) {
  std::map<std::string, int> index;
  for (size_t i = 0; i < speakers.size(); ++i) {
    index[speakers[i]] = static_cast<int>(i);
  }
  std::vector<DevUtterance> out;
  out.reserve(dev.size());
  for (const auto& u : dev) {
    out.push_back({index.at(u.entry.speaker_id), u.features});
  }
  return out;
}

void print_epoch_logs(const std::vector<EpochLog>& log) {
  for (const auto& row : log) {
    if (row.phase == TrainPhase::kPretrain) {
      std::printf("epoch %d [%s] loss=%.6f\n", row.epoch,
                  phase_name(row.phase), row.loss);
    } else {
      std::printf(
          "epoch %d [%s] loss=%.6f genuine_D=%.4f impostor_D=%.4f "
          "discard=%.3f\n",
          row.epoch, phase_name(row.phase), row.loss,
          row.genuine_mean_distance, row.impostor_mean_distance,
          row.discard_rate);
    }
  }
}

// Per-speaker enrolled d-vectors from the enroll split.
std::vector<SpeakerModel> enroll_from_manifest(
    const SpeakerNet& net, const Manifest& manifest, const RunConfig& cfg,
    const std::optional<std::string>& cache) {
  const int frames = static_cast<int>(
      std::lround(cfg.eval.duration_s * cfg.frames_per_second()));
  std::map<std::string, std::vector<FeatureWindow>> windows;
  for (const auto& u :
       load_split(manifest, Split::kEnroll, cfg, cfg.features.mode, cache)) {
    windows[u.entry.speaker_id].push_back(
        {head_window(u.features, frames), cfg.eval.duration_s});
  }
  require(!windows.empty(), ErrorCode::NoEnrollmentData,
          "manifest has no enroll split");
  std::vector<SpeakerModel> speakers;
  for (const auto& [id, wins] : windows) {
    speakers.push_back(enroll(net, wins, id, cfg.eval.normalize_dvector));
  }
  return speakers;
}

struct GmmEvalOutput {
  EerResult eer;
  std::vector<TrialScore> scores;
  std::vector<std::string> skipped;
};

GmmEvalOutput evaluate_gmm(const GmmModel& ubm, const Manifest& manifest,
                           const std::vector<Trial>& trials,
                           const RunConfig& cfg,
                           const std::optional<std::string>& cache) {
  // MAP-adapt each enroll speaker on its pooled utterance frames.
  std::map<std::string, std::vector<Matrix>> enroll_frames;
  for (const auto& u :
       load_split(manifest, Split::kEnroll, cfg, FeatureMode::kMfcc, cache)) {
    enroll_frames[u.entry.speaker_id].push_back(
        normalize_features(u.features));
  }
  require(!enroll_frames.empty(), ErrorCode::NoEnrollmentData,
          "manifest has no enroll split");

  MapConfig map_cfg;
  map_cfg.relevance_factor = cfg.gmm.relevance_factor;
  std::map<std::string, GmmModel> speakers;
  for (const auto& [id, mats] : enroll_frames) {
    Eigen::Index total = 0;
    for (const Matrix& m : mats) total += m.rows();
    Matrix stacked(total, mats[0].cols());
    Eigen::Index row = 0;
    for (const Matrix& m : mats) {
      stacked.middleRows(row, m.rows()) = m;
      row += m.rows();
    }
    speakers.emplace(id, map_adapt(ubm, stacked, map_cfg));
  }

  const int frames = static_cast<int>(
      std::lround(cfg.eval.duration_s * cfg.frames_per_second()));
  GmmEvalOutput out;
  std::vector<double> target_scores, nontarget_scores;
  for (const Trial& trial : trials) {
    auto it = speakers.find(trial.claimed_speaker);
    require(it != speakers.end(), ErrorCode::MissingEnrollment,
            "no adapted model for " + trial.claimed_speaker);
    Matrix window;
    try {
      window = head_window(
          load_utterance_features(trial.test_path, cfg, FeatureMode::kMfcc, cache),
          frames);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UtteranceTooShort) {
        out.skipped.push_back(trial.test_path);
        continue;
      }
      throw;
    }
    const double s = llr_score(ubm, it->second, window);
    out.scores.push_back({trial.claimed_speaker, trial.test_path, s, trial.target});
    (trial.target ? target_scores : nontarget_scores).push_back(s);
  }
  out.eer = compute_eer(target_scores, nontarget_scores);
  return out;
}

}  // namespace

// ---- RunConfig ----------------------------------------------------------

FeatureConfig RunConfig::front_end(FeatureMode mode) const {
  FeatureConfig fc = features;
  fc.mode = mode;
  return fc;
}

VadConfig RunConfig::vad_config() const {
  VadConfig v = vad;
  v.window_ms = features.window_ms;
  v.hop_ms = features.hop_ms;
  return v;
}

std::uint64_t RunConfig::digest(FeatureMode mode) const {
  return feature_digest(front_end(mode), vad_config(), sample_rate);
}

int RunConfig::frames_per_second() const {
  return static_cast<int>(std::lround(1000.0 / features.hop_ms));
}

RunConfig load_run_config(const std::optional<std::string>& json_path) {
  RunConfig cfg;
  if (!json_path) return cfg;

  std::ifstream in(*json_path);
  require(in.good(), ErrorCode::IoError, "cannot open config " + *json_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "bad JSON in " + *json_path + ": " + e.what());
  }

  check_keys(j, {"sample_rate", "seed", "vad", "features", "lstm", "train",
                 "gmm", "eval"},
             *json_path);
  cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("vad")) {
    check_keys(j["vad"], {"threshold_db"}, "vad");
    cfg.vad.threshold_db = j["vad"].value("threshold_db", cfg.vad.threshold_db);
  }
  if (j.contains("features")) {
    const json& f = j["features"];
    check_keys(f,
               {"window_ms", "hop_ms", "num_filters", "num_ceps", "fft_size",
                "mode", "log_floor"},
               "features");
    cfg.features.window_ms = f.value("window_ms", cfg.features.window_ms);
    cfg.features.hop_ms = f.value("hop_ms", cfg.features.hop_ms);
    cfg.features.num_filters = f.value("num_filters", cfg.features.num_filters);
    cfg.features.num_ceps = f.value("num_ceps", cfg.features.num_ceps);
    cfg.features.fft_size = f.value("fft_size", cfg.features.fft_size);
    if (f.contains("mode")) {
      cfg.features.mode = parse_mode(f["mode"].get<std::string>());
    }
    cfg.features.log_floor = f.value("log_floor", cfg.features.log_floor);
  }
  if (j.contains("lstm")) {
    check_keys(j["lstm"], {"hidden_dim", "num_layers"}, "lstm");
    cfg.lstm.hidden_dim = j["lstm"].value("hidden_dim", cfg.lstm.hidden_dim);
    cfg.lstm.num_layers = j["lstm"].value("num_layers", cfg.lstm.num_layers);
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t,
               {"learning_rate", "momentum", "batch_size", "epochs",
                "duration_s", "pair_selection", "th0", "batchnorm", "margin",
                "lambda"},
               "train");
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.momentum = t.value("momentum", cfg.train.momentum);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.duration_s = t.value("duration_s", cfg.train.duration_s);
    cfg.train.pair_selection = t.value("pair_selection", cfg.train.pair_selection);
    cfg.train.th0 = t.value("th0", cfg.train.th0);
    cfg.train.batchnorm = t.value("batchnorm", cfg.train.batchnorm);
    cfg.train.margin = t.value("margin", cfg.train.margin);
    cfg.train.lambda = t.value("lambda", cfg.train.lambda);
  }
  if (j.contains("gmm")) {
    check_keys(j["gmm"], {"mixtures", "relevance_factor"}, "gmm");
    cfg.gmm.mixtures = j["gmm"].value("mixtures", cfg.gmm.mixtures);
    cfg.gmm.relevance_factor =
        j["gmm"].value("relevance_factor", cfg.gmm.relevance_factor);
  }
  if (j.contains("eval")) {
    check_keys(j["eval"], {"duration_s", "normalize_dvector"}, "eval");
    cfg.eval.duration_s = j["eval"].value("duration_s", cfg.eval.duration_s);
    cfg.eval.normalize_dvector =
        j["eval"].value("normalize_dvector", cfg.eval.normalize_dvector);
  }
  return cfg;
}

void echo_run_config(const RunConfig& cfg, const std::string& out_dir,
                     const std::string& command) {
  fs::create_directories(out_dir);
  json j = config_to_json(cfg);
  j["command"] = command;
  j["version"] = kToolVersion;
  std::ofstream out(fs::path(out_dir) / "config.json");
  require(out.good(), ErrorCode::IoError, "cannot write config echo");
  out << j.dump(2) << '\n';
}

// ---- commands -----------------------------------------------------------

int cmd_extract(const RunConfig& cfg, const ExtractArgs& args) {
  const Manifest manifest = resolve_manifest(args.manifest, args.prefix_rule);
  echo_run_config(cfg, args.out_dir, "extract");

  const std::uint64_t digest = cfg.digest(args.mode);
  const FeatureConfig fc = cfg.front_end(args.mode);
  const VadConfig vc = cfg.vad_config();

  int ok = 0;
  std::int64_t frames_total = 0, frames_dropped = 0;
  std::vector<std::string> failures;
  for (const ManifestEntry& e : manifest.entries) {
    try {
      const Waveform raw = load_wav(e.path);
      require(raw.sample_rate == cfg.sample_rate, ErrorCode::SampleRateMismatch,
              e.path + " has sample rate " + std::to_string(raw.sample_rate));
      const auto decisions = vad_frame_decisions(raw, vc);
      for (bool keep : decisions) {
        ++frames_total;
        if (!keep) ++frames_dropped;
      }
      const Waveform voiced = apply_vad(raw, vc);
      const Matrix features = compute_features(voiced, fc);
      save_feature_cache(
          (fs::path(args.out_dir) / cache_file_name(e.path, digest)).string(),
          digest, features);
      ++ok;
    } catch (const Error& err) {
      failures.push_back(e.path + ": " + err.what());
    }
  }

  const double reject_rate =
      frames_total > 0 ? static_cast<double>(frames_dropped) / frames_total : 0.0;
  std::printf("extracted %d/%zu utterances, VAD rejected %.1f%% of frames\n",
              ok, manifest.entries.size(), 100.0 * reject_rate);
  for (const std::string& f : failures) {
    std::fprintf(stderr, "failed: %s\n", f.c_str());
  }
  return failures.empty() ? 0 : 1;
}

int cmd_train(const RunConfig& cfg, const TrainArgs& args) {
  const Manifest manifest = resolve_manifest(args.manifest, args.prefix_rule);
  echo_run_config(cfg, args.out_dir, args.finetune ? "finetune" : "pretrain");

  const std::vector<std::string> speakers = manifest.dev_speakers();
  require(!speakers.empty(), ErrorCode::EmptyBatch,
          "manifest has no dev split");
  const auto dev_loaded =
      load_split(manifest, Split::kDev, cfg, cfg.features.mode,
                 args.feature_cache);
  const auto dev = to_dev_set(dev_loaded, speakers);
  const std::uint64_t digest = cfg.digest(cfg.features.mode);

  SpeakerNet net;
  std::vector<EpochLog> log;
  std::string ckpt_name;
  if (!args.finetune) {
    LstmConfig lc = cfg.lstm;
    lc.input_dim = cfg.features.num_coeffs();
    net.lstm = init_lstm(lc, cfg.seed);
    net.feature_digest = digest;
    log = pretrain(net, dev, static_cast<int>(speakers.size()),
                   make_train_config(cfg, TrainPhase::kPretrain));
    ckpt_name = "pretrain.ckpt";
  } else {
    require(args.init_checkpoint.has_value(), ErrorCode::BadConfig,
            "fine-tuning needs --init with a pretrained checkpoint");
    net = load_lstm_checkpoint(*args.init_checkpoint);
    require(net.feature_digest == digest, ErrorCode::DigestMismatch,
            "checkpoint was trained with different feature settings");
    log = finetune(net, dev, make_train_config(cfg, TrainPhase::kFinetune));
    ckpt_name = "finetune.ckpt";
  }

  print_epoch_logs(log);
  const std::string ckpt_path = (fs::path(args.out_dir) / ckpt_name).string();
  save_lstm_checkpoint(ckpt_path, net);
  write_train_log((fs::path(args.out_dir) / "train_log.csv").string(), log);
  std::printf("checkpoint written to %s\n", ckpt_path.c_str());
  return 0;
}

int cmd_enroll(const RunConfig& cfg, const EnrollArgs& args) {
  const Manifest manifest = resolve_manifest(args.manifest);
  echo_run_config(cfg, args.out_dir, "enroll");

  const SpeakerNet net = load_lstm_checkpoint(args.checkpoint);
  require(net.feature_digest == cfg.digest(cfg.features.mode),
          ErrorCode::DigestMismatch,
          "checkpoint was trained with different feature settings");
  const auto speakers =
      enroll_from_manifest(net, manifest, cfg, args.feature_cache);
  const std::string path =
      (fs::path(args.out_dir) / "speakers.bin").string();
  save_speaker_models(path, speakers, net.feature_digest);
  std::printf("enrolled %zu speakers to %s\n", speakers.size(), path.c_str());
  return 0;
}

int cmd_verify(const RunConfig& cfg, const VerifyArgs& args) {
  const SpeakerNet net = load_lstm_checkpoint(args.checkpoint);
  auto [speakers, digest] = load_speaker_models(args.speakers_file);
  require(digest == net.feature_digest, ErrorCode::DigestMismatch,
          "speaker models and checkpoint disagree on feature settings");

  const SpeakerModel* claimed = nullptr;
  for (const auto& s : speakers) {
    if (s.speaker_id == args.speaker_id) {
      claimed = &s;
      break;
    }
  }
  require(claimed != nullptr, ErrorCode::MissingEnrollment,
          "speaker " + args.speaker_id + " is not enrolled");

  const Matrix features =
      load_utterance_features(args.wav_path, cfg, cfg.features.mode, std::nullopt);
  const int frames = static_cast<int>(
      std::lround(cfg.eval.duration_s * cfg.frames_per_second()));
  const FeatureWindow window{head_window(features, frames), cfg.eval.duration_s};
  const double s = score(net, *claimed, window, cfg.eval.normalize_dvector);
  std::printf("score=%.6f\n", s);
  std::printf("decision=%s\n", s >= args.threshold ? "accept" : "reject");
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& args) {
  const Manifest manifest = resolve_manifest(args.manifest);
  echo_run_config(cfg, args.out_dir, "evaluate");
  const std::vector<Trial> trials = load_trials(args.trials);

  EerResult eer;
  std::vector<TrialScore> scores;
  std::vector<std::string> skipped;

  if (args.system == "gmm") {
    auto [ubm, digest] = load_gmm_checkpoint(args.checkpoint);
    require(digest == cfg.digest(FeatureMode::kMfcc), ErrorCode::DigestMismatch,
            "UBM was trained with different feature settings");
    auto out = evaluate_gmm(ubm, manifest, trials, cfg, args.feature_cache);
    eer = out.eer;
    scores = std::move(out.scores);
    skipped = std::move(out.skipped);
  } else {
    require(args.system == "lstm", ErrorCode::BadConfig,
            "unknown system '" + args.system + "'");
    const SpeakerNet net = load_lstm_checkpoint(args.checkpoint);
    require(net.feature_digest == cfg.digest(cfg.features.mode),
            ErrorCode::DigestMismatch,
            "checkpoint was trained with different feature settings");
    const auto speakers =
        enroll_from_manifest(net, manifest, cfg, args.feature_cache);
    const int frames = static_cast<int>(
        std::lround(cfg.eval.duration_s * cfg.frames_per_second()));
    auto loader = [&](const std::string& path) -> FeatureWindow {
      return {head_window(load_utterance_features(path, cfg, cfg.features.mode,
                                                  args.feature_cache),
                          frames),
              cfg.eval.duration_s};
    };
    auto result = evaluate_protocol(net, speakers, trials, loader,
                                    cfg.eval.normalize_dvector);
    eer = result.eer;
    scores = std::move(result.scores);
    skipped = std::move(result.skipped);
  }

  write_score_csv((fs::path(args.out_dir) / "scores.csv").string(), scores);
  std::printf("EER=%.6f\n", eer.eer);
  std::printf("threshold=%.6f targets=%d nontargets=%d\n", eer.threshold,
              eer.num_target, eer.num_nontarget);
  for (const std::string& s : skipped) {
    std::fprintf(stderr, "skipped (too short): %s\n", s.c_str());
  }
  return skipped.empty() ? 0 : 1;
}

int cmd_sweep_duration(const RunConfig& cfg, const SweepArgs& args) {
  require(!args.durations.empty(), ErrorCode::BadConfig,
          "no durations given");
  echo_run_config(cfg, args.out_dir, "sweep-duration");

  std::vector<std::pair<double, double>> rows;
  for (double duration : args.durations) {
    RunConfig dcfg = cfg;
    dcfg.train.duration_s = duration;
    dcfg.eval.duration_s = duration;

    char sub[32];
    std::snprintf(sub, sizeof(sub), "duration_%g", duration);
    const std::string sub_dir = (fs::path(args.out_dir) / sub).string();

    TrainArgs pre{args.manifest, sub_dir, false, std::nullopt,
                  args.feature_cache, std::nullopt};
    require(cmd_train(dcfg, pre) == 0, ErrorCode::BadConfig,
            "pretraining failed during the sweep");
    TrainArgs fin{args.manifest, sub_dir, true,
                  (fs::path(sub_dir) / "pretrain.ckpt").string(),
                  args.feature_cache, std::nullopt};
    require(cmd_train(dcfg, fin) == 0, ErrorCode::BadConfig,
            "fine-tuning failed during the sweep");

    EvaluateArgs ev{args.manifest, args.trials,
                    (fs::path(sub_dir) / "finetune.ckpt").string(), sub_dir,
                    "lstm", args.feature_cache};
    require(cmd_evaluate(dcfg, ev) == 0, ErrorCode::BadConfig,
            "evaluation failed during the sweep");

    // Read back the EER from the scores the evaluation just wrote.
    std::vector<double> targets, nontargets;
    std::ifstream in(fs::path(sub_dir) / "scores.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto last_comma = line.rfind(',');
      const auto prev_comma = line.rfind(',', last_comma - 1);
      const double s =
          std::stod(line.substr(prev_comma + 1, last_comma - prev_comma - 1));
      if (line.substr(last_comma + 1) == "target") {
        targets.push_back(s);
      } else {
        nontargets.push_back(s);
      }
    }
    rows.emplace_back(duration, compute_eer(targets, nontargets).eer);
  }

  std::ofstream out(fs::path(args.out_dir) / "duration_sweep.csv");
  require(out.good(), ErrorCode::IoError, "cannot write the sweep CSV");
  out << "duration_s,eer\n";
  char buf[64];
  for (const auto& [duration, eer] : rows) {
    std::snprintf(buf, sizeof(buf), "%g,%.6f\n", duration, eer);
    out << buf;
  }
  std::printf("sweep finished over %zu durations\n", rows.size());
  return 0;
}

int cmd_train_ubm(const RunConfig& cfg, const TrainUbmArgs& args) {
  const Manifest manifest = resolve_manifest(args.manifest);
  echo_run_config(cfg, args.out_dir, "train-ubm");

  const auto dev = load_split(manifest, Split::kDev, cfg, FeatureMode::kMfcc,
                              args.feature_cache);
  require(!dev.empty(), ErrorCode::EmptyBatch, "manifest has no dev split");

  Eigen::Index total = 0;
  for (const auto& u : dev) total += u.features.rows();
  Matrix frames(total, dev[0].features.cols());
  Eigen::Index row = 0;
  for (const auto& u : dev) {
    const Matrix normed = normalize_features(u.features);
    frames.middleRows(row, normed.rows()) = normed;
    row += normed.rows();
  }

  UbmTrainOptions opts;
  opts.num_components = cfg.gmm.mixtures;
  opts.seed = cfg.seed;
  std::vector<double> trace;
  const GmmModel ubm = train_ubm(frames, opts, &trace);

  const std::string path = (fs::path(args.out_dir) / "ubm.ckpt").string();
  save_gmm_checkpoint(path, ubm, cfg.digest(FeatureMode::kMfcc));
  std::printf("UBM with %d components trained on %lld frames in %zu EM "
              "iterations, final LL/frame %.4f\n",
              cfg.gmm.mixtures, static_cast<long long>(total), trace.size(),
              trace.empty() ? 0.0 : trace.back());
  std::printf("checkpoint written to %s\n", path.c_str());
  return 0;
}

int cmd_adapt_speaker(const RunConfig& cfg, const AdaptArgs& args) {
  const Manifest manifest = resolve_manifest(args.manifest);
  echo_run_config(cfg, args.out_dir, "adapt-speaker");

  auto [ubm, digest] = load_gmm_checkpoint(args.ubm_checkpoint);
  require(digest == cfg.digest(FeatureMode::kMfcc), ErrorCode::DigestMismatch,
          "UBM was trained with different feature settings");

  std::map<std::string, std::vector<Matrix>> enroll_frames;
  for (const auto& u : load_split(manifest, Split::kEnroll, cfg,
                                  FeatureMode::kMfcc, args.feature_cache)) {
    enroll_frames[u.entry.speaker_id].push_back(normalize_features(u.features));
  }
  require(!enroll_frames.empty(), ErrorCode::NoEnrollmentData,
          "manifest has no enroll split");

  MapConfig map_cfg;
  map_cfg.relevance_factor = cfg.gmm.relevance_factor;
  std::vector<std::pair<std::string, GmmModel>> speakers;
  for (const auto& [id, mats] : enroll_frames) {
    Eigen::Index total = 0;
    for (const Matrix& m : mats) total += m.rows();
    Matrix stacked(total, mats[0].cols());
    Eigen::Index row = 0;
    for (const Matrix& m : mats) {
      stacked.middleRows(row, m.rows()) = m;
      row += m.rows();
    }
    speakers.emplace_back(id, map_adapt(ubm, stacked, map_cfg));
  }

  const std::string path =
      (fs::path(args.out_dir) / "speakers_gmm.bin").string();
  save_gmm_speakers(path, speakers, digest);
  std::printf("adapted %zu speakers to %s\n", speakers.size(), path.c_str());
  return 0;
}

}  // namespace sv
