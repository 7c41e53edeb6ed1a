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

#include "dsrg_cli/commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "dsrg/concepts.h"
#include "dsrg/dualspace.h"
#include "dsrg/error.h"
#include "dsrg_cli/svg.h"

namespace dsrg::cli {
namespace {

ArtifactPaths Paths(const RunConfig& config) { return {config.out_dir}; }

void EnsureDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    Fail(ErrorCode::kIoError, "cannot create directory " + dir.string());
  }
}

Vocabulary LoadVocabulary(const RunConfig& config) {
  Vocabulary vocab = config.vocab_path.empty()
                         ? Vocabulary::Default()
                         : Vocabulary::Parse(ReadFileBytes(config.vocab_path));
  if (config.vocab_size != 0 && config.vocab_size != vocab.size()) {
    Fail(ErrorCode::kInvalidConfig,
         "encoder.vocab_size " + std::to_string(config.vocab_size) +
             " != vocabulary size " + std::to_string(vocab.size()));
  }
  return vocab;
}

EncoderNet LoadEncoder(const std::filesystem::path& path) {
  return EncoderFromCheckpoint(LoadCheckpoint(path));
}

DenoiserNet LoadDenoiser(const std::filesystem::path& path) {
  return DenoiserFromCheckpoint(LoadCheckpoint(path));
}

// Prompts both diffusion trainers draw from; identical for teacher and RIIDL.
ConditionSource DiffusionSource(const RunConfig& config, const WorldBundle& bundle,
                                const EncoderNet& teacher) {
  PromptSamplerOptions pso;
  pso.max_length = config.max_length;
  pso.per_aspect_rate = config.teacher_per_aspect_rate;
  return MakeConditionSource(
      bundle.world, teacher,
      SamplePrompts(bundle.vocab, config.teacher_prompts,
                    StageSeed(config, Stage::kTeacherPrompts), pso));
}

double Ratio(double final_loss, double initial_loss) {
  return initial_loss > 0.0 ? final_loss / initial_loss : 0.0;
}

DirectiveSpec ParseSingleDirective(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size()) {
    Fail(ErrorCode::kInvalidConfig, "expected aspect/attribute, got '" + text + "'");
  }
  return {text.substr(0, slash), text.substr(slash + 1), 0.0};
}

}  // namespace

std::vector<std::vector<GridCell>> InterpolationCells(const RunConfig& config,
                                                      const ModelSet& models,
                                                      const PromptSpec& prompt,
                                                      const DualSpaceConfig& base,
                                                      const GenerateRequest& request) {
  const DirectiveSpec a = ParseSingleDirective(request.grid_a);
  const DirectiveSpec b = ParseSingleDirective(request.grid_b);
  const ConceptSpace& space_a =
      models.concepts.Get(ConceptSpaceTag::kEmbedding, a.aspect);
  const ConceptSpace& space_b =
      models.concepts.Get(ConceptSpaceTag::kEmbedding, b.aspect);
  const auto grid =
      InterpolateConcepts(space_a, a.attribute, space_b, b.attribute, request.grid);
  std::vector<std::vector<GridCell>> cells(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cells[i].resize(grid[i].size());
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      DualSpaceConfig cfg = base;
      GridCell cell;
      cell.gamma_a = grid[i][j][0].gamma * request.grid_scale;
      cell.gamma_b = grid[i][j][1].gamma * request.grid_scale;
      cfg.embedding_directives = {{a.aspect, a.attribute, cell.gamma_a},
                                  {b.aspect, b.attribute, cell.gamma_b}};
      ClampDirectives(cfg.embedding_directives, config.embedding_gamma_limit);
      std::vector<GenerationRecord> recs;
      for (std::size_t s = 0; s < request.count; ++s) {
        cfg.seed = base.seed + s;
        recs.push_back(GenerateResponsible(models.View(), prompt, cfg));
      }
      cell.share_a = LabelShare(recs, a.aspect, a.attribute);
      cell.share_b = LabelShare(recs, b.aspect, b.attribute);
      cells[i][j] = cell;
    }
  }
  return cells;
}

namespace {

void WriteGrid(const RunConfig& config, const ModelSet& models, const PromptSpec& prompt,
               const DualSpaceConfig& base, const GenerateRequest& request) {
  const auto cells = InterpolationCells(config, models, prompt, base, request);
  const DirectiveSpec a = ParseSingleDirective(request.grid_a);
  const DirectiveSpec b = ParseSingleDirective(request.grid_b);
  const std::string name = "interp_" + a.attribute + "_" + b.attribute + ".svg";
  WriteFileBytes(Paths(config).dir / name,
                 InterpolationGridSvg(cells, request.grid_a, request.grid_b));
}

}  // namespace

ModelSet LoadModelSet(const RunConfig& config, bool embedding_concepts,
                      bool latent_concepts) {
  const ArtifactPaths paths = Paths(config);
  ModelSet m;
  m.bundle = LoadWorldBundle(paths);
  m.schedule = NoiseSchedule::Cosine(config.steps);
  m.teacher_encoder = LoadEncoder(paths.teacher_encoder());
  m.rice = LoadEncoder(paths.rice());
  m.teacher_denoiser = LoadDenoiser(paths.teacher_denoiser());
  m.riidl = LoadDenoiser(paths.riidl());
  if (embedding_concepts) {
    ConceptsFromCheckpoint(LoadCheckpoint(paths.concepts(ConceptSpaceTag::kEmbedding)),
                           m.concepts);
  }
  if (latent_concepts) {
    ConceptsFromCheckpoint(LoadCheckpoint(paths.concepts(ConceptSpaceTag::kLatent)),
                           m.concepts);
  }
  m.classifier = AttributeClassifier::FromWorld(m.bundle.world);
  return m;
}

std::size_t ClampDirectives(std::vector<DirectiveSpec>& directives, double limit) {
  std::size_t changed = 0;
  for (DirectiveSpec& d : directives) {
    const double c = std::clamp(d.gamma, -limit, limit);
    if (c != d.gamma) {
      d.gamma = c;
      ++changed;
    }
  }
  return changed;
}

std::string ReportTimestamp() {
  if (const char* env = std::getenv("DSRG_TIMESTAMP"); env != nullptr && *env != '\0') {
    return env;
  }
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &utc);
  return buf;
}

std::string SeedHash(std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : std::to_string(seed)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(h & 0xffffffffu));
  return buf;
}

TrainTarget ParseTrainTarget(std::string_view name) {
  if (name == "teacher-enc") return TrainTarget::kTeacherEncoder;
  if (name == "teacher-diff") return TrainTarget::kTeacherDiffusion;
  if (name == "rice") return TrainTarget::kRice;
  if (name == "riidl") return TrainTarget::kRiidl;
  if (name == "concepts") return TrainTarget::kConcepts;
  Fail(ErrorCode::kInvalidConfig, "unknown training target '" + std::string(name) + "'");
}

void CmdWorld(const RunConfig& config) {
  Validate(config);
  const ArtifactPaths paths = Paths(config);
  EnsureDir(paths.dir);
  WorldBundle b;
  b.vocab = LoadVocabulary(config);
  b.skew = SkewModel::Build(b.vocab, config.skew);
  b.world = ToyWorld::Build(b.vocab.registry(), b.skew, config.world);
  SaveWorldBundle(paths, b);
}

double CmdTrain(const RunConfig& config, TrainTarget target) {
  Validate(config);
  const ArtifactPaths paths = Paths(config);
  const WorldBundle bundle = LoadWorldBundle(paths);
  const NoiseSchedule schedule = NoiseSchedule::Cosine(config.steps);

  switch (target) {
    case TrainTarget::kTeacherEncoder: {
      const EncoderNet teacher =
          BuildTeacher(StageSeed(config, Stage::kTeacherEncoder), bundle.vocab,
                       bundle.skew, config.teacher_encoder);
      SaveCheckpoint(paths.teacher_encoder(), EncoderToCheckpoint(teacher));
      return 0.0;
    }
    case TrainTarget::kTeacherDiffusion: {
      const EncoderNet teacher = LoadEncoder(paths.teacher_encoder());
      TeacherDiffusionOptions opts = config.teacher_diffusion;
      opts.seed = StageSeed(config, Stage::kTeacherDiffusion);
      const auto result =
          TrainTeacherDenoiser(DiffusionSource(config, bundle, teacher), schedule, opts);
      SaveCheckpoint(paths.teacher_denoiser(), DenoiserToCheckpoint(result.net));
      WriteFileBytes(paths.curve("teacher_diff"), CurveCsv(result.curve));
      return Ratio(result.final_holdout_loss, result.initial_holdout_loss);
    }
    case TrainTarget::kRice: {
      const EncoderNet teacher = LoadEncoder(paths.teacher_encoder());
      PromptSamplerOptions pso;
      pso.max_length = config.max_length;
      const auto prompts = SamplePrompts(bundle.vocab, config.rice_prompts,
                                         StageSeed(config, Stage::kRicePrompts), pso);
      RiceOptions opts = config.rice;
      opts.seed = StageSeed(config, Stage::kRice);
      const RiceResult result = TrainRice(teacher, prompts, opts);
      SaveCheckpoint(paths.rice(), EncoderToCheckpoint(result.student));
      WriteFileBytes(paths.curve("rice"), CurveCsv(result.curve));
      return Ratio(result.final_holdout_loss, result.initial_holdout_loss);
    }
    case TrainTarget::kRiidl: {
      const EncoderNet teacher = LoadEncoder(paths.teacher_encoder());
      const DenoiserNet denoiser = LoadDenoiser(paths.teacher_denoiser());
      RiidlOptions opts = config.riidl;
      opts.seed = StageSeed(config, Stage::kRiidl);
      const auto result =
          TrainRiidl(denoiser, DiffusionSource(config, bundle, teacher), schedule, opts);
      SaveCheckpoint(paths.riidl(), DenoiserToCheckpoint(result.net));
      WriteFileBytes(paths.curve("riidl"), CurveCsv(result.curve));
      return Ratio(result.final_holdout_loss, result.initial_holdout_loss);
    }
    case TrainTarget::kConcepts: {
      const EncoderNet teacher = LoadEncoder(paths.teacher_encoder());
      const EncoderNet rice = LoadEncoder(paths.rice());
      const DenoiserNet denoiser = LoadDenoiser(paths.teacher_denoiser());
      ConceptSampleOptions opts = config.concepts;
      opts.seed = StageSeed(config, Stage::kConcepts);
      ConceptBank bank;
      const AspectRegistry& registry = bundle.vocab.registry();
      for (const std::string& aspect : config.concept_aspects) {
        bank.Add(FitConcept(
            registry, aspect, EmbeddingConceptSamples(rice, bundle.vocab, aspect, opts),
            ConceptSpaceTag::kEmbedding, config.blend, config.relative_eps));
        bank.Add(FitConcept(
            registry, aspect,
            LatentConceptSamples(denoiser, schedule, teacher, bundle.vocab, aspect, opts),
            ConceptSpaceTag::kLatent, config.blend, config.relative_eps));
      }
      for (ConceptSpaceTag tag :
           {ConceptSpaceTag::kEmbedding, ConceptSpaceTag::kLatent}) {
        SaveCheckpoint(paths.concepts(tag), ConceptsToCheckpoint(bank, tag));
      }
      return 0.0;
    }
  }
  return 0.0;
}

std::vector<GenerationRecord> CmdGenerate(const RunConfig& config,
                                          const GenerateRequest& request) {
  Validate(config);
  DualSpaceConfig dual = config.dual;
  dual.seed = StageSeed(config, Stage::kGenerate);
  if (ClampDirectives(dual.embedding_directives, config.embedding_gamma_limit) +
          ClampDirectives(dual.latent_directives, config.latent_gamma_limit) >
      0) {
    std::fprintf(stderr, "warning: directive gammas clamped to the configured limits\n");
  }
  const bool want_grid = request.grid >= 2;
  const ModelSet models =
      LoadModelSet(config, want_grid || !dual.embedding_directives.empty(),
                   !dual.latent_directives.empty());

  std::vector<GenerationRecord> records;
  if (request.prompt.empty()) {
    std::vector<std::string> professions = config.professions;
    if (professions.empty()) professions = models.bundle.vocab.professions();
    records = Sweep(models.View(), models.bundle.vocab, professions, dual,
                    config.samples_per_profession);
  } else {
    if (request.count == 0) Fail(ErrorCode::kInvalidConfig, "count must be >= 1");
    const PromptSpec prompt =
        ParsePrompt(models.bundle.vocab, request.prompt, config.max_length);
    DualSpaceConfig cfg = dual;
    for (std::size_t i = 0; i < request.count; ++i) {
      cfg.seed = dual.seed + i;
      records.push_back(GenerateResponsible(models.View(), prompt, cfg));
    }
    if (want_grid) WriteGrid(config, models, prompt, dual, request);
  }
  EnsureDir(Paths(config).dir);
  AppendRecords(Paths(config).records(), records);
  return records;
}

EvalOutputs CmdEval(const RunConfig& config, const std::filesystem::path& records_path) {
  Validate(config);
  const ArtifactPaths paths = Paths(config);
  const WorldBundle bundle = LoadWorldBundle(paths);
  const auto records = ReadRecords(records_path);
  const AttributeClassifier classifier = AttributeClassifier::FromWorld(bundle.world);

  EvalOutputs out;
  out.report = BuildReport(records, bundle.vocab, classifier, config.professions);
  const std::string stem = "report_" + ReportTimestamp() + "_" + SeedHash(config.seed);
  out.csv = paths.dir / (stem + ".csv");
  out.markdown = paths.dir / (stem + ".md");
  out.svg = paths.dir / (stem + ".svg");
  EnsureDir(paths.dir);
  WriteFileBytes(out.csv, EmitReport(out.report, ReportFormat::kCsv));
  WriteFileBytes(out.markdown, EmitReport(out.report, ReportFormat::kMarkdown));
  WriteFileBytes(out.svg, DeltaBarChartSvg(out.report));
  return out;
}

}  // namespace dsrg::cli
