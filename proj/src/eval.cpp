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

#include "sv/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sv/error.hpp"

namespace sv {

SpeakerModel enroll(const SpeakerNet& net,
                    const std::vector<FeatureWindow>& utterances,
                    const std::string& speaker_id, bool l2_normalize) {
  require(!utterances.empty(), ErrorCode::NoEnrollmentData,
          "no enrollment utterances for " + speaker_id);
  Vector sum = Vector::Zero(net.lstm.config.hidden_dim);
  for (const FeatureWindow& u : utterances) {
    Vector e = embed(net, u);
    if (l2_normalize) {
      const double norm = e.norm();
      if (norm > 0) e /= norm;
    }
    sum += e;
  }
  SpeakerModel model;
  model.speaker_id = speaker_id;
  model.dvector = sum / static_cast<double>(utterances.size());
  if (l2_normalize) {
    const double norm = model.dvector.norm();
    if (norm > 0) model.dvector /= norm;
  }
  model.num_enroll_utterances = static_cast<int>(utterances.size());
  return model;
}

double score(const SpeakerNet& net, const SpeakerModel& speaker,
             const FeatureWindow& test, bool l2_normalize) {
  Vector e = embed(net, test);
  if (l2_normalize) {
    const double norm = e.norm();
    if (norm > 0) e /= norm;
  }
  return -(e - speaker.dvector).norm();
}

EerResult compute_eer(const std::vector<double>& target_scores,
                      const std::vector<double>& nontarget_scores) {
  require(!target_scores.empty() && !nontarget_scores.empty(),
          ErrorCode::EmptyScoreList, "need both target and nontarget scores");

  std::vector<double> thresholds;
  thresholds.reserve(target_scores.size() + nontarget_scores.size());
  thresholds.insert(thresholds.end(), target_scores.begin(), target_scores.end());
  thresholds.insert(thresholds.end(), nontarget_scores.begin(),
                    nontarget_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<double> targets(target_scores);
  std::vector<double> nontargets(nontarget_scores);
  std::sort(targets.begin(), targets.end());
  std::sort(nontargets.begin(), nontargets.end());
  const double nt = static_cast<double>(targets.size());
  const double nn = static_cast<double>(nontargets.size());

  auto frr_at = [&](double t) {
    // fraction of target scores strictly below t (ties accept)
    return static_cast<double>(std::lower_bound(targets.begin(), targets.end(), t) -
                               targets.begin()) /
           nt;
  };
  auto far_at = [&](double t) {
    // fraction of nontarget scores >= t
    return static_cast<double>(nontargets.end() -
                               std::lower_bound(nontargets.begin(),
                                                nontargets.end(), t)) /
           nn;
  };

  // FAR - FRR is non-increasing in t; it starts at 1 for t = min score.
  // Walk until the sign flips and interpolate the crossing; a virtual
  // operating point past the maximum score (FRR 1, FAR 0) closes the sweep.
  double prev_t = thresholds.front();
  double prev_frr = frr_at(prev_t), prev_far = far_at(prev_t);
  EerResult result;
  result.num_target = static_cast<int>(targets.size());
  result.num_nontarget = static_cast<int>(nontargets.size());

  const size_t num_points = thresholds.size() + 1;
  for (size_t k = 1; k < num_points; ++k) {
    double t, frr, far;
    if (k < thresholds.size()) {
      t = thresholds[k];
      frr = frr_at(t);
      far = far_at(t);
    } else {
      t = thresholds.back();
      frr = 1.0;
      far = 0.0;
    }
    if (far - frr <= 0.0) {
      const double d1 = prev_far - prev_frr;
      const double d2 = far - frr;
      const double alpha = d1 == d2 ? 0.0 : d1 / (d1 - d2);
      if (alpha >= 1.0) {  // crossing sits exactly on this operating point
        result.eer = frr;
        result.threshold = t;
      } else if (alpha <= 0.0) {
        result.eer = prev_frr;
        result.threshold = prev_t;
      } else {
        result.eer = prev_frr + alpha * (frr - prev_frr);
        result.threshold = prev_t + alpha * (t - prev_t);
      }
      return result;
    }
    prev_t = t;
    prev_frr = frr;
    prev_far = far;
  }
  // Unreachable: the virtual end point always has FAR - FRR = -1.
  result.eer = 0.5;
  result.threshold = thresholds.back();
  return result;
}

std::vector<Trial> load_trials(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open trial list " + path);

  std::vector<Trial> trials;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string claimed, test_path, label;
    std::getline(ss, claimed, '\t');
    std::getline(ss, test_path, '\t');
    std::getline(ss, label, '\t');
    require(!claimed.empty() && !test_path.empty() &&
                (label == "target" || label == "nontarget"),
            ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": expected "
            "`speaker<TAB>path<TAB>{target|nontarget}`");
    trials.push_back({claimed, test_path, label == "target"});
  }
  return trials;
}

ProtocolResult evaluate_protocol(
    const SpeakerNet& net, const std::vector<SpeakerModel>& speakers,
    const std::vector<Trial>& trials,
    const std::function<FeatureWindow(const std::string&)>& window_loader,
    bool l2_normalize) {
  std::map<std::string, const SpeakerModel*> by_id;
  for (const SpeakerModel& s : speakers) by_id[s.speaker_id] = &s;

  ProtocolResult result;
  std::vector<double> target_scores, nontarget_scores;
  for (const Trial& trial : trials) {
    auto it = by_id.find(trial.claimed_speaker);
    require(it != by_id.end(), ErrorCode::MissingEnrollment,
            "no enrolled model for " + trial.claimed_speaker);
    FeatureWindow window;
    try {
      window = window_loader(trial.test_path);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UtteranceTooShort) {
        result.skipped.push_back(trial.test_path);
        continue;
      }
      throw;
    }
    const double s = score(net, *it->second, window, l2_normalize);
    result.scores.push_back({trial.claimed_speaker, trial.test_path, s,
                             trial.target});
    (trial.target ? target_scores : nontarget_scores).push_back(s);
  }
  result.eer = compute_eer(target_scores, nontarget_scores);
  return result;
}

std::vector<std::pair<double, EerResult>> duration_sweep(
    const std::vector<DurationPoint>& points, const std::vector<Trial>& trials,
    bool l2_normalize) {
  std::vector<std::pair<double, EerResult>> rows;
  for (const DurationPoint& point : points) {
    require(point.net != nullptr, ErrorCode::BadConfig,
            "duration point has no model");
    const auto result = evaluate_protocol(*point.net, point.speakers, trials,
                                          point.window_loader, l2_normalize);
    rows.emplace_back(point.duration_s, result.eer);
  }
  return rows;
}

void write_duration_sweep_csv(
    const std::string& path,
    const std::vector<std::pair<double, EerResult>>& rows) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path);
  out << "duration_s,eer\n";
  char buf[64];
  for (const auto& [duration, eer] : rows) {
    std::snprintf(buf, sizeof(buf), "%g,%.6f\n", duration, eer.eer);
    out << buf;
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

void write_score_csv(const std::string& path,
                     const std::vector<TrialScore>& scores) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot open " + path);
  out << "claimed_speaker,test_path,score,label\n";
  char buf[64];
  for (const TrialScore& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.score);
    out << s.claimed_speaker << ',' << s.test_path << ',' << buf << ','
        << (s.target ? "target" : "nontarget") << '\n';
  }
  require(out.good(), ErrorCode::IoError, "write failed for " + path);
}

}  // namespace sv
