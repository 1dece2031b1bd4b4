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

#ifndef SV_EVAL_HPP_
#define SV_EVAL_HPP_

#include <functional>
#include <string>
#include <vector>

#include "sv/speaker_net.hpp"
#include "sv/types.hpp"

namespace sv {

// Enrolled identity: the mean of its utterance embeddings (d-vector).
struct SpeakerModel {
  std::string speaker_id;
  Vector dvector;
  int num_enroll_utterances = 0;
};

struct Trial {
  std::string claimed_speaker;
  std::string test_path;
  bool target = false;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;  // score at the crossing
  int num_target = 0;
  int num_nontarget = 0;
};

// Averages per-utterance embeddings; with l2_normalize each embedding is
// unit-normalized before averaging and the mean is normalized again.
SpeakerModel enroll(const SpeakerNet& net,
                    const std::vector<FeatureWindow>& utterances,
                    const std::string& speaker_id, bool l2_normalize = false);

// Negative Euclidean distance between the test embedding and the
// d-vector; larger means more similar, 0 is the maximum.
double score(const SpeakerNet& net, const SpeakerModel& speaker,
             const FeatureWindow& test, bool l2_normalize = false);

// Equal error rate: FRR(t) = fraction of target scores < t, FAR(t) =
// fraction of nontarget scores >= t (ties accept). The crossing is
// linearly interpolated between adjacent operating points.
EerResult compute_eer(const std::vector<double>& target_scores,
                      const std::vector<double>& nontarget_scores);

// `claimed_speaker<TAB>test_path<TAB>{target|nontarget}` lines; `#`
// comments and blank lines ignored.
std::vector<Trial> load_trials(const std::string& path);

struct TrialScore {
  std::string claimed_speaker;
  std::string test_path;
  double score = 0.0;
  bool target = false;
};

struct ProtocolResult {
  EerResult eer;
  std::vector<TrialScore> scores;        // in trial order
  std::vector<std::string> skipped;      // too-short test utterances
};

// Scores every trial against enrolled speakers. window_loader maps a test
// path to a feature window at the evaluation duration; it may throw
// UtteranceTooShort, which skips (and reports) the trial.
ProtocolResult evaluate_protocol(
    const SpeakerNet& net, const std::vector<SpeakerModel>& speakers,
    const std::vector<Trial>& trials,
    const std::function<FeatureWindow(const std::string&)>& window_loader,
    bool l2_normalize = false);

void write_score_csv(const std::string& path,
                     const std::vector<TrialScore>& scores);

// One duration's evaluation inputs: the model trained at that duration,
// its enrolled speakers, and a loader producing windows of that length.
struct DurationPoint {
  double duration_s = 0.0;
  const SpeakerNet* net = nullptr;
  std::vector<SpeakerModel> speakers;
  std::function<FeatureWindow(const std::string&)> window_loader;
};

// EER per duration; development, enrollment and evaluation share the
// duration, so callers supply a model per entry.
std::vector<std::pair<double, EerResult>> duration_sweep(
    const std::vector<DurationPoint>& points, const std::vector<Trial>& trials,
    bool l2_normalize = false);

void write_duration_sweep_csv(
    const std::string& path,
    const std::vector<std::pair<double, EerResult>>& rows);

}  // namespace sv

#endif  // SV_EVAL_HPP_
