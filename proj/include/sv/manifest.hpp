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

#ifndef SV_MANIFEST_HPP_
#define SV_MANIFEST_HPP_

#include <optional>
#include <string>
#include <vector>

#include "sv/types.hpp"

namespace sv {

enum class Split { kDev, kEnroll, kEval };

const char* split_name(Split s);

struct ManifestEntry {
  std::string path;
  std::string speaker_id;
  Split split = Split::kDev;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split_entries(Split s) const;
  // Dev speaker ids in order of first appearance; defines softmax row order.
  std::vector<std::string> dev_speakers() const;
};

// Parses tab-separated `path<TAB>speaker_id<TAB>split` lines. `#` starts a
// comment and blank lines are skipped. When speaker_prefix_rule is given,
// speakers whose id starts with the prefix are reassigned to the eval split
// and all others to dev, overriding the split column.
Manifest resolve_manifest(const std::string& path,
                          const std::optional<std::string>&
                              speaker_prefix_rule = std::nullopt);

}  // namespace sv

#endif  // SV_MANIFEST_HPP_
