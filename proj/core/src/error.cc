// Copyright 2026 The DSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsrg/error.h"

namespace dsrg {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateInput:
      return "DegenerateInput";
    case ErrorCode::kInvalidInput:
      return "InvalidInput";
    case ErrorCode::kConvergenceFailure:
      return "ConvergenceFailure";
    case ErrorCode::kUnknownToken:
      return "UnknownToken";
    case ErrorCode::kTrainingDiverged:
      return "TrainingDiverged";
    case ErrorCode::kSpaceMismatch:
      return "SpaceMismatch";
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kMissingArtifact:
      return "MissingArtifact";
    case ErrorCode::kCorruptCheckpoint:
      return "CorruptCheckpoint";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void Fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace dsrg
