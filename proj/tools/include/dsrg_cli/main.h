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

#ifndef DSRG_CLI_MAIN_H_
#define DSRG_CLI_MAIN_H_

#include "dsrg/error.h"

namespace dsrg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingArtifact = 3;
inline constexpr int kExitNumerical = 4;

int ExitCodeFor(ErrorCode code);

// Parses flags and runs one subcommand; returns the process exit code.
int Run(int argc, const char* const* argv);

}  // namespace dsrg::cli

#endif  // DSRG_CLI_MAIN_H_
