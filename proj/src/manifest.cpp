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

#include "sv/manifest.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sv/error.hpp"

namespace sv {

const char* split_name(Split s) {
  switch (s) {
    case Split::kDev: return "dev";
    case Split::kEnroll: return "enroll";
    case Split::kEval: return "eval";
  }
  return "?";
}

std::vector<ManifestEntry> Manifest::split_entries(Split s) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(e);
  }
  return out;
}

std::vector<std::string> Manifest::dev_speakers() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.split == Split::kDev && seen.insert(e.speaker_id).second) {
      out.push_back(e.speaker_id);
    }
  }
  return out;
}

namespace {

Split parse_split(const std::string& s, int line_no) {
  if (s == "dev") return Split::kDev;
  if (s == "enroll") return Split::kEnroll;
  if (s == "eval") return Split::kEval;
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": unknown split '" + s + "'");
}

}  // namespace

Manifest resolve_manifest(const std::string& path,
                          const std::optional<std::string>& prefix_rule) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open manifest " + path);

  Manifest m;
  std::set<std::string> seen_paths;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    require(fields.size() == 3, ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": expected 3 tab-separated "
            "fields, got " + std::to_string(fields.size()));

    ManifestEntry e;
    e.path = fields[0];
    e.speaker_id = fields[1];
    require(!e.path.empty(), ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": empty path");
    require(!e.speaker_id.empty(), ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": empty speaker id");
    e.split = parse_split(fields[2], line_no);

    if (prefix_rule) {
      e.split = e.speaker_id.rfind(*prefix_rule, 0) == 0 ? Split::kEval
                                                         : Split::kDev;
    }

    require(seen_paths.insert(e.path).second, ErrorCode::DuplicatePath,
            "line " + std::to_string(line_no) + ": duplicate path " + e.path);
    m.entries.push_back(std::move(e));
  }

  // Genuine pairs need at least two dev utterances per speaker.
  std::map<std::string, int> dev_counts;
  for (const auto& e : m.entries) {
    if (e.split == Split::kDev) ++dev_counts[e.speaker_id];
  }
  for (const auto& [speaker, count] : dev_counts) {
    require(count >= 2, ErrorCode::SpeakerWithSingleDevUtterance,
            "dev speaker " + speaker + " has only one utterance");
  }
  return m;
}

}  // namespace sv
