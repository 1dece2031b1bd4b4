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

#ifndef SV_ERROR_HPP_
#define SV_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sv {

enum class ErrorCode {
  // audio + manifests
  MalformedHeader,
  UnsupportedEncoding,
  EmptyAudio,
  SampleRateMismatch,
  AllSilent,
  DuplicatePath,
  SpeakerWithSingleDevUtterance,
  ParseError,
  // features
  SignalTooShort,
  TooFewFrames,
  UtteranceTooShort,
  BadConfig,
  // network
  ShapeMismatch,
  NonFiniteActivation,
  IndexOutOfRange,
  EmptyBatch,
  StaleCache,
  // training
  BatchTooSmall,
  NoGenuinePairs,
  NoPairsSurvive,
  // eval
  NoEnrollmentData,
  EmptyScoreList,
  MissingEnrollment,
  // gmm
  DegenerateCluster,
  NoAdaptationData,
  EmptyTest,
  // io
  DigestMismatch,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) unless cond holds.
inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) throw Error(code, message);
}

}  // namespace sv

#endif  // SV_ERROR_HPP_
