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

#include "doctest.h"
#include "support/test_util.hpp"
#include "sv/error.hpp"

namespace {

std::string write_manifest(const svtest::TempDir& tmp,
                           const std::string& body) {
  const std::string path = tmp.file("manifest.tsv");
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("resolve_manifest parses splits as listed") {
  svtest::TempDir tmp("manifest_basic");
  const auto path = write_manifest(tmp,
                                   "# comment line\n"
                                   "a1.wav\tA01\tdev\n"
                                   "a2.wav\tA01\tdev\n"
                                   "b1.wav\tB01\tenroll\n"
                                   "b2.wav\tB01\teval\n");
  const sv::Manifest m = sv::resolve_manifest(path);
  REQUIRE(m.entries.size() == 4);
  CHECK(m.entries[0].split == sv::Split::kDev);
  CHECK(m.entries[2].split == sv::Split::kEnroll);
  CHECK(m.entries[3].split == sv::Split::kEval);
  CHECK(m.dev_speakers() == std::vector<std::string>{"A01"});
}

TEST_CASE("prefix rule reassigns splits by speaker id") {
  svtest::TempDir tmp("manifest_prefix");
  const auto path = write_manifest(tmp,
                                   "e1.wav\tE01\tdev\n"
                                   "e2.wav\tE01\tdev\n"
                                   "a1.wav\tA01\tenroll\n"
                                   "a2.wav\tA01\teval\n");
  const sv::Manifest m = sv::resolve_manifest(path, std::string("E"));
  for (const auto& e : m.entries) {
    if (e.speaker_id == "E01") CHECK(e.split == sv::Split::kEval);
    if (e.speaker_id == "A01") CHECK(e.split == sv::Split::kDev);
  }
}

TEST_CASE("a dev speaker with a single utterance is rejected") {
  svtest::TempDir tmp("manifest_single");
  const auto path = write_manifest(tmp,
                                   "a1.wav\tA01\tdev\n"
                                   "b1.wav\tB01\tdev\n"
                                   "b2.wav\tB01\tdev\n");
  try {
    sv::resolve_manifest(path);
    FAIL("expected SpeakerWithSingleDevUtterance");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::SpeakerWithSingleDevUtterance);
  }
}

TEST_CASE("duplicate paths are rejected") {
  svtest::TempDir tmp("manifest_dup");
  const auto path = write_manifest(tmp,
                                   "a1.wav\tA01\tdev\n"
                                   "a1.wav\tA01\tdev\n");
  try {
    sv::resolve_manifest(path);
    FAIL("expected DuplicatePath");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::DuplicatePath);
  }
}

TEST_CASE("parse errors carry the line number") {
  svtest::TempDir tmp("manifest_parse");
  const auto path = write_manifest(tmp,
                                   "a1.wav\tA01\tdev\n"
                                   "a2.wav\tA01\tdev\n"
                                   "broken line without tabs\n");
  try {
    sv::resolve_manifest(path);
    FAIL("expected ParseError");
  } catch (const sv::Error& e) {
    CHECK(e.code() == sv::ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("unknown split names are parse errors") {
  svtest::TempDir tmp("manifest_split");
  const auto path = write_manifest(tmp, "a1.wav\tA01\ttrain\n");
  CHECK_THROWS_AS(sv::resolve_manifest(path), sv::Error);
}
