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

#ifndef DSRG_CLI_ARTIFACTS_H_
#define DSRG_CLI_ARTIFACTS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dsrg/checkpoint.h"
#include "dsrg/concepts.h"
#include "dsrg/diffusion.h"
#include "dsrg/encoder.h"
#include "dsrg/eval.h"
#include "dsrg/world.h"

namespace dsrg::cli {

// File layout of one run directory.
struct ArtifactPaths {
  std::filesystem::path dir;

  std::filesystem::path vocab() const { return dir / "vocab.txt"; }
  std::filesystem::path skew() const { return dir / "skew.json"; }
  std::filesystem::path world() const { return dir / "world.dsrg"; }
  std::filesystem::path teacher_encoder() const { return dir / "teacher_encoder.dsrg"; }
  std::filesystem::path teacher_denoiser() const { return dir / "teacher_denoiser.dsrg"; }
  std::filesystem::path rice() const { return dir / "rice.dsrg"; }
  std::filesystem::path riidl() const { return dir / "riidl.dsrg"; }
  std::filesystem::path concepts(ConceptSpaceTag tag) const;
  std::filesystem::path records() const { return dir / "records.jsonl"; }
  std::filesystem::path curve(const std::string& stage) const {
    return dir / (stage + "_curve.csv");
  }
};

// Network parameters as `<block>` tensors of shape rows x cols.
Checkpoint EncoderToCheckpoint(const EncoderNet& net);
// Throws CorruptCheckpoint when blocks are missing or mis-shaped.
EncoderNet EncoderFromCheckpoint(const Checkpoint& ckpt);
Checkpoint DenoiserToCheckpoint(const DenoiserNet& net);
DenoiserNet DenoiserFromCheckpoint(const Checkpoint& ckpt);

// One tag's spaces: tensors concept/<aspect>/{mean,whitening} and
// concept/<aspect>/<attr>/{distill,zca,resp}, plus a JSON manifest tensor
// `concept/manifest` with the tag, blend weights and sample counts.
Checkpoint ConceptsToCheckpoint(const ConceptBank& bank, ConceptSpaceTag tag);
// Adds the stored spaces to `bank`.
void ConceptsFromCheckpoint(const Checkpoint& ckpt, ConceptBank& bank);

// Centroids as world/<aspect>/<attr> plus a `world/manifest` JSON tensor.
Checkpoint WorldToCheckpoint(const ToyWorld& world);
ToyWorld WorldFromCheckpoint(const Checkpoint& ckpt, const AspectRegistry& registry,
                             const SkewModel& skew);

// {"strength": s, "distributions": {profession: [[p...] per aspect]}}.
std::string SkewToJson(const SkewModel& skew);
SkewModel SkewFromJson(const std::string& text, const AspectRegistry& registry);

struct WorldBundle {
  Vocabulary vocab;
  SkewModel skew;
  ToyWorld world;
};

void SaveWorldBundle(const ArtifactPaths& paths, const WorldBundle& bundle);
// Throws MissingArtifact when a world file is absent.
WorldBundle LoadWorldBundle(const ArtifactPaths& paths);

// One JSON object per line with keys prompt, seed, output, labels and config.
std::string RecordToJson(const GenerationRecord& record);
// Throws InvalidInput for malformed lines.
GenerationRecord RecordFromJson(const std::string& line);
void AppendRecords(const std::filesystem::path& path,
                   std::span<const GenerationRecord> records);
// Throws MissingArtifact when the file is absent.
std::vector<GenerationRecord> ReadRecords(const std::filesystem::path& path);

// epoch,train_loss,holdout_loss rows.
std::string CurveCsv(std::span<const LossPoint> curve);

}  // namespace dsrg::cli

#endif  // DSRG_CLI_ARTIFACTS_H_
