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

#ifndef DSRG_ERROR_H_
#define DSRG_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsrg {

enum class ErrorCode {
  kDegenerateInput,
  kInvalidInput,
  kConvergenceFailure,
  kUnknownToken,
  kTrainingDiverged,
  kSpaceMismatch,
  kInvalidConfig,
  kIoError,
  kMissingArtifact,
  kCorruptCheckpoint,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// failure class so callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace dsrg

#endif  // DSRG_ERROR_H_
