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

#ifndef SV_COMMANDS_HPP_
#define SV_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sv/features.hpp"
#include "sv/lstm.hpp"
#include "sv/vad.hpp"

namespace sv {

inline constexpr const char* kToolVersion = "0.1.0";

// Resolved run settings: defaults, overlaid by an optional JSON config
// file, overlaid by command-line flags. The resolved form is echoed into
// every output directory next to the artifacts it produced.
struct RunConfig {
  int sample_rate = 16000;
  std::uint64_t seed = 0;
  VadConfig vad;  // frame geometry mirrors the feature settings
  FeatureConfig features;
  LstmConfig lstm;  // input_dim follows the feature coefficient count

  struct TrainSection {
    double learning_rate = 0.05;
    double momentum = 0.9;
    int batch_size = 16;
    int epochs = 20;
    double duration_s = 1.0;  // crop length
    bool pair_selection = true;
    double th0 = 1.0;
    bool batchnorm = true;
    double margin = 1.0;
    double lambda = 1e-4;
  } train;

  struct GmmSection {
    int mixtures = 64;
    double relevance_factor = 16.0;
  } gmm;

  struct EvalSection {
    double duration_s = 1.0;
    bool normalize_dvector = false;
  } eval;

  // Feature settings for a given front end, with VAD geometry synced.
  FeatureConfig front_end(FeatureMode mode) const;
  VadConfig vad_config() const;
  std::uint64_t digest(FeatureMode mode) const;
  int frames_per_second() const;
};

// Defaults overlaid with the JSON file when given; unknown keys are
// errors.
RunConfig load_run_config(const std::optional<std::string>& json_path);

// Writes the resolved config (plus tool version and command name) as
// config.json inside out_dir, creating the directory first.
void echo_run_config(const RunConfig& cfg, const std::string& out_dir,
                     const std::string& command);

struct ExtractArgs {
  std::string manifest;
  std::string out_dir;
  std::optional<std::string> prefix_rule;
  FeatureMode mode = FeatureMode::kLogFilterbank;
};
int cmd_extract(const RunConfig& cfg, const ExtractArgs& args);

struct TrainArgs {
  std::string manifest;
  std::string out_dir;
  bool finetune = false;
  std::optional<std::string> init_checkpoint;  // required for finetune
  std::optional<std::string> feature_cache;
  std::optional<std::string> prefix_rule;
};
int cmd_train(const RunConfig& cfg, const TrainArgs& args);

struct EnrollArgs {
  std::string manifest;
  std::string checkpoint;
  std::string out_dir;
  std::optional<std::string> feature_cache;
};
int cmd_enroll(const RunConfig& cfg, const EnrollArgs& args);

struct VerifyArgs {
  std::string checkpoint;
  std::string speakers_file;
  std::string speaker_id;
  std::string wav_path;
  double threshold = -1.0;
};
int cmd_verify(const RunConfig& cfg, const VerifyArgs& args);

struct EvaluateArgs {
  std::string manifest;
  std::string trials;
  std::string checkpoint;  // LSTM checkpoint, or UBM for --system gmm
  std::string out_dir;
  std::string system = "lstm";
  std::optional<std::string> feature_cache;
};
int cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& args);

struct SweepArgs {
  std::string manifest;
  std::string trials;
  std::string out_dir;
  std::vector<double> durations;
  std::optional<std::string> feature_cache;
};
int cmd_sweep_duration(const RunConfig& cfg, const SweepArgs& args);

struct TrainUbmArgs {
  std::string manifest;
  std::string out_dir;
  std::optional<std::string> feature_cache;
};
int cmd_train_ubm(const RunConfig& cfg, const TrainUbmArgs& args);

struct AdaptArgs {
  std::string manifest;
  std::string ubm_checkpoint;
  std::string out_dir;
  std::optional<std::string> feature_cache;
};
int cmd_adapt_speaker(const RunConfig& cfg, const AdaptArgs& args);

}  // namespace sv

#endif  // SV_COMMANDS_HPP_
