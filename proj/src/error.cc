// Copyright 2026 The Sparse Attack Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sparse_attack/error.h"

namespace sparse_attack {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIllegalAction: return "IllegalAction";
    case ErrorCode::kSteppedTerminal: return "SteppedTerminal";
    case ErrorCode::kInvalidIndices: return "InvalidIndices";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kNoLegalAction: return "NoLegalAction";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kDivergedTraining: return "DivergedTraining";
    case ErrorCode::kEmptyEvaluation: return "EmptyEvaluation";
    case ErrorCode::kBadTargets: return "BadTargets";
    case ErrorCode::kWrongArity: return "WrongArity";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sparse_attack
