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

#ifndef DSRG_CLI_COMMANDS_H_
#define DSRG_CLI_COMMANDS_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsrg/dualspace.h"
#include "dsrg/eval.h"
#include "dsrg_cli/artifacts.h"
#include "dsrg_cli/config.h"
#include "dsrg_cli/svg.h"

namespace dsrg::cli {

// Every artifact generation can touch, loaded from one run directory.
struct ModelSet {
  WorldBundle bundle;
  NoiseSchedule schedule;
  EncoderNet teacher_encoder;
  EncoderNet rice;
  DenoiserNet teacher_denoiser;
  DenoiserNet riidl;
  ConceptBank concepts;
  AttributeClassifier classifier;

  // Pointers into this set; the set must outlive the view.
  DualSpaceModels View() const {
    return {&schedule, &teacher_encoder, &rice,      &teacher_denoiser,
            &riidl,    &concepts,        &classifier};
  }
};

// Throws MissingArtifact for any absent file. Concept files are read only
// when requested.
ModelSet LoadModelSet(const RunConfig& config, bool embedding_concepts,
                      bool latent_concepts);

// Writes vocab.txt, skew.json and world.dsrg. Throws IoError when the output
// directory cannot be created or written.
void CmdWorld(const RunConfig& config);

enum class TrainTarget { kTeacherEncoder, kTeacherDiffusion, kRice, kRiidl, kConcepts };

// "teacher-enc", "teacher-diff", "rice", "riidl", "concepts"; throws
// InvalidConfig otherwise.
TrainTarget ParseTrainTarget(std::string_view name);

// Writes the target's checkpoint and, for trained networks, its loss curve.
// Throws MissingArtifact when a prerequisite file is absent. Returns the
// final/initial held-out loss ratio (0 for constructed artifacts).
double CmdTrain(const RunConfig& config, TrainTarget target);

struct GenerateRequest {
  // Empty: sweep config.professions (all vocabulary professions when that
  // list is empty) with config.samples_per_profession seeds each.
  std::string prompt;
  std::size_t count = 1;
  // Interpolation grid between two "aspect/attribute" directives in the
  // embedding space; skipped when grid < 2.
  std::size_t grid = 0;
  std::string grid_a;
  std::string grid_b;
  double grid_scale = 1.0;
};

// Classified attribute shares over request.count seeds (from base.seed) for
// every cell of the k x k interpolation grid between request.grid_a and
// request.grid_b. Throws InvalidConfig for a malformed directive.
std::vector<std::vector<GridCell>> InterpolationCells(const RunConfig& config,
                                                      const ModelSet& models,
                                                      const PromptSpec& prompt,
                                                      const DualSpaceConfig& base,
                                                      const GenerateRequest& request);

// Appends one record per generated sample to records.jsonl and returns them.
// With a grid request an interpolation SVG is written as well. Directive
// gammas are clamped to the configured limits.
std::vector<GenerationRecord> CmdGenerate(const RunConfig& config,
                                          const GenerateRequest& request);

struct EvalOutputs {
  FairnessReport report;
  std::filesystem::path csv;
  std::filesystem::path markdown;
  std::filesystem::path svg;
};

// Builds the fairness report for a records file and writes
// report_<timestamp>_<seedhash>.{csv,md,svg} into the run directory.
// Throws DegenerateInput for an empty records file.
EvalOutputs CmdEval(const RunConfig& config, const std::filesystem::path& records);

// DSRG_TIMESTAMP when set, otherwise the current UTC time as
// YYYYMMDDTHHMMSSZ.
std::string ReportTimestamp();
// Eight hex digits of FNV-1a over the decimal seed.
std::string SeedHash(std::uint64_t seed);

// Clamps every directive gamma to [-limit, limit]; returns how many changed.
std::size_t ClampDirectives(std::vector<DirectiveSpec>& directives, double limit);

}  // namespace dsrg::cli

#endif  // DSRG_CLI_COMMANDS_H_
