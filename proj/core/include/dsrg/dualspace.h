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

#ifndef DSRG_DUALSPACE_H_
#define DSRG_DUALSPACE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsrg/concepts.h"
#include "dsrg/diffusion.h"
#include "dsrg/encoder.h"
#include "dsrg/eval.h"

namespace dsrg {

// A directive by name, resolved against a ConceptBank at generation time.
struct DirectiveSpec {
  std::string aspect;
  std::string attribute;
  double gamma = 0.0;

  friend bool operator==(const DirectiveSpec&, const DirectiveSpec&) = default;
};

struct DualSpaceConfig {
  double lambda_e = 0.95;
  double lambda_d = 0.05;
  std::vector<DirectiveSpec> embedding_directives;
  std::vector<DirectiveSpec> latent_directives;
  InjectionWindow window;
  // Latent directives shift the student's noise prediction by default.
  HookTarget latent_target = HookTarget::kNoise;
  std::uint64_t seed = 0;

  // Throws InvalidConfig unless both weights lie in [0, 1], sum to 1 within
  // 1e-9, and the window is valid.
  void Validate() const;
  // One-line key=value description stored with records.
  std::string Describe() const;

  friend bool operator==(const DualSpaceConfig&, const DualSpaceConfig&) = default;
};

// Everything generation reads. All pointers must outlive the call; only the
// members a path needs are dereferenced (a zero-weight path is skipped).
struct DualSpaceModels {
  const NoiseSchedule* schedule = nullptr;
  const EncoderNet* teacher_encoder = nullptr;
  const EncoderNet* rice = nullptr;
  const DenoiserNet* teacher_denoiser = nullptr;
  const DenoiserNet* riidl = nullptr;
  const ConceptBank* concepts = nullptr;
  const AttributeClassifier* classifier = nullptr;
};

std::vector<Directive> ResolveDirectives(const ConceptBank& bank,
                                         std::span<const DirectiveSpec> specs,
                                         ConceptSpaceTag tag);

// Embedding path: teacher denoiser conditioned on the modulated student
// embedding.
Vector EmbeddingPath(const DualSpaceModels& models, const PromptSpec& prompt,
                     const DualSpaceConfig& cfg, std::uint64_t seed);
// Latent path: student denoiser conditioned on the teacher embedding with
// latent modulation inside the injection window.
Vector LatentPath(const DualSpaceModels& models, const PromptSpec& prompt,
                  const DualSpaceConfig& cfg, std::uint64_t seed);

// lambda_e * EmbeddingPath + lambda_d * LatentPath with one shared seed
// (cfg.seed). Throws InvalidConfig for a bad cfg and InvalidInput for dim
// mismatches.
GenerationRecord GenerateResponsible(const DualSpaceModels& models,
                                     const PromptSpec& prompt,
                                     const DualSpaceConfig& cfg);

// Prompt used for a profession in sweeps ("a <profession>").
std::string ProfessionPrompt(const std::string& profession);

// Records for seeds cfg.seed + i, i < n, profession-major.
std::vector<GenerationRecord> Sweep(const DualSpaceModels& models,
                                    const Vocabulary& vocab,
                                    std::span<const std::string> professions,
                                    const DualSpaceConfig& cfg, std::size_t n);

struct CalibrationOptions {
  std::string aspect = "gender";
  std::string attribute;
  // Share of `attribute` to aim for.
  double target_share = 0.5;
  std::size_t seeds = 200;
  double gamma_lo = 0.0;
  double gamma_hi = 3.0;
  int iterations = 12;
};

struct CalibrationResult {
  double gamma = 0.0;
  double share = 0.0;
};

// Bisects the embedding-space gamma of one directive (appended to cfg's
// embedding directives) until the classified share of the attribute over
// seeds cfg.seed + i is closest to the target. Assumes the share grows with
// gamma; throws ConvergenceFailure when the bracket does not contain the
// target.
CalibrationResult CalibrateGamma(const DualSpaceModels& models, const PromptSpec& prompt,
                                 const DualSpaceConfig& cfg,
                                 const CalibrationOptions& options);

// Fraction of records whose `aspect` label equals `attribute`.
double LabelShare(std::span<const GenerationRecord> records, const std::string& aspect,
                  const std::string& attribute);

}  // namespace dsrg

#endif  // DSRG_DUALSPACE_H_
