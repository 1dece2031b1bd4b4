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

#include "sv/speaker_net.hpp"

namespace sv {

Vector embed(const SpeakerNet& net, const Matrix& window) {
  if (net.input_norm) {
    return forward(net.lstm, net.input_norm->forward_eval(window));
  }
  return forward(net.lstm, window);
}

Matrix embed_batch(const SpeakerNet& net, const std::vector<Matrix>& windows) {
  if (!net.input_norm) return forward_batch(net.lstm, windows);
  std::vector<Matrix> normed;
  normed.reserve(windows.size());
  for (const Matrix& w : windows) normed.push_back(net.input_norm->forward_eval(w));
  return forward_batch(net.lstm, normed);
}

}  // namespace sv
