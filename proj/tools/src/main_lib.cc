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

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "dsrg/checkpoint.h"
#include "dsrg/error.h"
#include "dsrg_cli/commands.h"
#include "dsrg_cli/config.h"
#include "dsrg_cli/main.h"

namespace dsrg::cli {

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
      return kExitConfig;
    case ErrorCode::kMissingArtifact:
    case ErrorCode::kCorruptCheckpoint:
      return kExitMissingArtifact;
    case ErrorCode::kTrainingDiverged:
    case ErrorCode::kConvergenceFailure:
      return kExitNumerical;
    default:
      return kExitOther;
  }
}

int Run(int argc, const char* const* argv) {
  CLI::App app{"dsrg: responsible toy diffusion pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string format = "csv";
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_option("--set", overrides, "Override, key=value (repeatable)");
  app.add_option("--out", out_dir, "Run directory");
  app.add_option("--format", format, "Report format printed by eval")
      ->check(CLI::IsMember({"csv", "md"}));

  auto* world = app.add_subcommand("world", "Write vocabulary, skew model and world");
  auto* train = app.add_subcommand("train", "Build or train one artifact");
  std::string target;
  train
      ->add_option("target", target,
                   "teacher-enc | teacher-diff | rice | riidl | concepts")
      ->required()
      ->check(
          CLI::IsMember({"teacher-enc", "teacher-diff", "rice", "riidl", "concepts"}));
  auto* generate = app.add_subcommand("generate", "Responsible generation");
  GenerateRequest request;
  generate->add_option("--prompt", request.prompt, "Prompt; omit to sweep professions");
  generate->add_option("--count", request.count, "Seeds per prompt");
  generate->add_option("--grid", request.grid, "Interpolation grid size k");
  generate->add_option("--grid-a", request.grid_a, "Row directive aspect/attribute");
  generate->add_option("--grid-b", request.grid_b, "Column directive aspect/attribute");
  generate->add_option("--grid-scale", request.grid_scale, "Gamma at the far grid edge");
  auto* eval = app.add_subcommand("eval", "Fairness report for a records file");
  std::string records_path;
  eval->add_option("--records", records_path, "Records file (default: run records)");
  auto* show = app.add_subcommand("config", "Print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = ParseConfig(ReadFileBytes(config_path));
    for (const std::string& o : overrides) ApplyOverride(config, o);
    if (*seed_opt) config.seed = seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    Validate(config);

    if (*world) {
      CmdWorld(config);
    } else if (*train) {
      const double ratio = CmdTrain(config, ParseTrainTarget(target));
      if (ratio > 0.0) std::printf("held-out loss ratio %.6g\n", ratio);
    } else if (*generate) {
      const auto records = CmdGenerate(config, request);
      std::printf("%zu record(s) appended\n", records.size());
    } else if (*eval) {
      const auto path = records_path.empty() ? ArtifactPaths{config.out_dir}.records()
                                             : std::filesystem::path(records_path);
      const EvalOutputs out = CmdEval(config, path);
      std::fputs(ReadFileBytes(format == "md" ? out.markdown : out.csv).c_str(), stdout);
    } else if (*show) {
      std::fputs(EmitConfig(config).c_str(), stdout);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return kExitOk;
}

}  // namespace dsrg::cli
