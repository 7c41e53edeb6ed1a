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

#ifndef DSRG_CLI_CONFIG_H_
#define DSRG_CLI_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dsrg/concepts.h"
#include "dsrg/diffusion.h"
#include "dsrg/dualspace.h"
#include "dsrg/encoder.h"
#include "dsrg/world.h"

namespace dsrg::cli {

// Every knob of a run. Sub-seeds for the individual stages are derived from
// `seed` with MixSeed, so one number pins the whole pipeline.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "dsrg_out";
  // Vocabulary file; empty selects the built-in vocabulary.
  std::string vocab_path;

  // World.
  double skew = 0.9;
  ToyWorldOptions world;

  // Text encoders. vocab_size 0 means "whatever the vocabulary holds".
  std::size_t vocab_size = 0;
  std::size_t max_length = kDefaultMaxPromptLength;
  TeacherEncoderOptions teacher_encoder;

  // Diffusion.
  int steps = 100;
  std::size_t teacher_prompts = 2000;
  double teacher_per_aspect_rate = 0.3;
  TeacherDiffusionOptions teacher_diffusion;

  // Students.
  std::size_t rice_prompts = 200;
  RiceOptions rice;
  RiidlOptions riidl;

  // Concepts.
  std::vector<std::string> concept_aspects = {"gender", "race", "age", "safe"};
  BlendParams blend;
  double relative_eps = kDefaultRelativeEps;
  ConceptSampleOptions concepts;

  // Generation.
  DualSpaceConfig dual;
  std::vector<std::string> professions;
  std::size_t samples_per_profession = 100;
  // Interactive clamps on directive gammas.
  double embedding_gamma_limit = 3.0;
  double latent_gamma_limit = 30.0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws InvalidConfig on any invariant violation: lambda weights, positive
// dims, skew in [0, 1], injection window, positive epochs/batches/lrs.
void Validate(const RunConfig& config);

// `key = value` lines; `#` starts a comment. Keys are dotted
// (`rice.lr = 0.01`). Unset keys keep their defaults. Throws InvalidConfig
// for unknown keys, repeated keys, malformed lines or unparsable values.
RunConfig ParseConfig(std::string_view text);
// Applies one `key=value` override.
void ApplyOverride(RunConfig& config, std::string_view assignment);
// Every key in a fixed order; ParseConfig(EmitConfig(c)) == c.
std::string EmitConfig(const RunConfig& config);
// All accepted keys, emission order.
std::vector<std::string> ConfigKeys();

// "aspect/attribute:gamma" items separated by commas; empty for none.
std::vector<DirectiveSpec> ParseDirectives(std::string_view text);
std::string FormatDirectives(const std::vector<DirectiveSpec>& directives);

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double v);

// Stage salts for MixSeed(config.seed, salt).
enum class Stage : std::uint64_t {
  kTeacherEncoder = 1,
  kTeacherPrompts = 2,
  kTeacherDiffusion = 3,
  kRicePrompts = 4,
  kRice = 5,
  kRiidl = 6,
  kConcepts = 7,
  kGenerate = 8,
};
std::uint64_t StageSeed(const RunConfig& config, Stage stage);

}  // namespace dsrg::cli

#endif  // DSRG_CLI_CONFIG_H_
