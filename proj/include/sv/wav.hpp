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

#ifndef SV_WAV_HPP_
#define SV_WAV_HPP_

#include <string>

#include "sv/types.hpp"

namespace sv {

// Reads a RIFF/WAVE file. Only mono 16-bit PCM is accepted; integer
// samples are scaled by 1/32768 into [-1, 1).
Waveform load_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are rounded to the nearest integer
// level and clamped to [-32768, 32767].
void write_wav(const std::string& path, const Waveform& w);

}  // namespace sv

#endif  // SV_WAV_HPP_
