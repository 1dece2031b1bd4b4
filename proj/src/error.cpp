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

#include "sv/error.hpp"

namespace sv {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::AllSilent: return "AllSilent";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::SpeakerWithSingleDevUtterance:
      return "SpeakerWithSingleDevUtterance";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::UtteranceTooShort: return "UtteranceTooShort";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::NoGenuinePairs: return "NoGenuinePairs";
    case ErrorCode::NoPairsSurvive: return "NoPairsSurvive";
    case ErrorCode::NoEnrollmentData: return "NoEnrollmentData";
    case ErrorCode::EmptyScoreList: return "EmptyScoreList";
    case ErrorCode::MissingEnrollment: return "MissingEnrollment";
    case ErrorCode::DegenerateCluster: return "DegenerateCluster";
    case ErrorCode::NoAdaptationData: return "NoAdaptationData";
    case ErrorCode::EmptyTest: return "EmptyTest";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace sv
