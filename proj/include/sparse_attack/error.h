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

#ifndef SPARSE_ATTACK_ERROR_H_
#define SPARSE_ATTACK_ERROR_H_

#include <stdexcept>
#include <string>

namespace sparse_attack {

// Error kinds raised by the library. The numeric values are part of the C API
// (they are returned negated from the sa_* functions).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIllegalAction = 2,
  kSteppedTerminal = 3,
  kInvalidIndices = 4,
  kTooLarge = 5,
  kShapeMismatch = 6,
  kNonFinite = 7,
  kNotScalar = 8,
  kNoLegalAction = 9,
  kConfigMismatch = 10,
  kDivergedTraining = 11,
  kEmptyEvaluation = 12,
  kBadTargets = 13,
  kWrongArity = 14,
  kConfigError = 15,
  kIoError = 16,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace sparse_attack

#endif  // SPARSE_ATTACK_ERROR_H_
