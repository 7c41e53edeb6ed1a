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

#include "dsrg/dualspace.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "dsrg/error.h"

namespace dsrg {

void DualSpaceConfig::Validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(lambda_e) || !in_unit(lambda_d) ||
      std::abs(lambda_e + lambda_d - 1.0) > 1e-9) {
    Fail(ErrorCode::kInvalidConfig,
         "lambda_e and lambda_d must lie in [0, 1] and sum to 1");
  }
  if (!(window.lo >= 0.0 && window.lo < window.hi && window.hi <= 1.0)) {
    Fail(ErrorCode::kInvalidConfig, "injection window must satisfy 0 <= lo < hi <= 1");
  }
  for (const auto* list : {&embedding_directives, &latent_directives}) {
    for (const DirectiveSpec& d : *list) {
      if (!std::isfinite(d.gamma)) {
        Fail(ErrorCode::kInvalidConfig, "directive gamma must be finite");
      }
    }
  }
}

std::string DualSpaceConfig::Describe() const {
  auto num = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  std::string out = "lambda_e=" + num(lambda_e) + " lambda_d=" + num(lambda_d) +
                    " window=" + num(window.lo) + ":" + num(window.hi);
  out += latent_target == HookTarget::kNoise ? " target=noise" : " target=state";
  auto list = [&](const char* key, const std::vector<DirectiveSpec>& ds) {
    for (const DirectiveSpec& d : ds) {
      out += std::string(" ") + key + "=" + d.aspect + "/" + d.attribute + ":" +
             num(d.gamma);
    }
  };
  list("embedding", embedding_directives);
  list("latent", latent_directives);
  return out;
}

std::vector<Directive> ResolveDirectives(const ConceptBank& bank,
                                         std::span<const DirectiveSpec> specs,
                                         ConceptSpaceTag tag) {
  std::vector<Directive> out;
  for (const DirectiveSpec& s : specs) {
    const ConceptSpace& space = bank.Get(tag, s.aspect);
    space.attribute(s.attribute);
    out.push_back({&space, s.attribute, s.gamma});
  }
  return out;
}

namespace {

template <typename T>
const T& Need(const T* p, const char* what) {
  if (p == nullptr) {
    Fail(ErrorCode::kMissingArtifact, std::string("generation needs the ") + what);
  }
  return *p;
}

}  // namespace

Vector EmbeddingPath(const DualSpaceModels& models, const PromptSpec& prompt,
                     const DualSpaceConfig& cfg, std::uint64_t seed) {
  const Vector z = Encode(Need(models.rice, "RICE encoder"), prompt);
  Vector cond = z;
  if (!cfg.embedding_directives.empty()) {
    const auto directives =
        ResolveDirectives(Need(models.concepts, "concept bank"), cfg.embedding_directives,
                          ConceptSpaceTag::kEmbedding);
    cond = ModulateEmbedding(z, directives);
  }
  return Sample(Need(models.schedule, "noise schedule"),
                Need(models.teacher_denoiser, "teacher denoiser"), cond, seed);
}

Vector LatentPath(const DualSpaceModels& models, const PromptSpec& prompt,
                  const DualSpaceConfig& cfg, std::uint64_t seed) {
  const NoiseSchedule& schedule = Need(models.schedule, "noise schedule");
  const Vector cond = Encode(Need(models.teacher_encoder, "teacher encoder"), prompt);
  LatentHook hook;
  if (!cfg.latent_directives.empty()) {
    auto directives = ResolveDirectives(Need(models.concepts, "concept bank"),
                                        cfg.latent_directives, ConceptSpaceTag::kLatent);
    const int steps = schedule.steps();
    const InjectionWindow window = cfg.window;
    hook = [directives = std::move(directives), steps, window](const Vector& x, int tau) {
      return ModulateLatent(x, directives, tau, steps, window);
    };
  }
  return Sample(schedule, Need(models.riidl, "RIIDL denoiser"), cond, seed, hook,
                cfg.window, cfg.latent_target);
}

GenerationRecord GenerateResponsible(const DualSpaceModels& models,
                                     const PromptSpec& prompt,
                                     const DualSpaceConfig& cfg) {
  cfg.Validate();
  Vector a, b;
  if (cfg.lambda_e > 0.0) a = EmbeddingPath(models, prompt, cfg, cfg.seed);
  if (cfg.lambda_d > 0.0) b = LatentPath(models, prompt, cfg, cfg.seed);
  if (cfg.lambda_e > 0.0 && cfg.lambda_d > 0.0 && a.dim() != b.dim()) {
    Fail(ErrorCode::kInvalidInput, "paths produced different latent dims");
  }
  const std::size_t m = cfg.lambda_e > 0.0 ? a.dim() : b.dim();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (cfg.lambda_e > 0.0) out[i] += cfg.lambda_e * a[i];
    if (cfg.lambda_d > 0.0) out[i] += cfg.lambda_d * b[i];
  }
  GenerationRecord record;
  record.prompt = prompt.Text();
  record.seed = cfg.seed;
  record.output = Vector::FromDoubles(out);
  if (!record.output.AllFinite()) {
    Fail(ErrorCode::kTrainingDiverged, "generation produced non-finite output");
  }
  record.labels = Need(models.classifier, "attribute classifier").Classify(record.output);
  record.config = cfg.Describe();
  return record;
}

std::string ProfessionPrompt(const std::string& profession) { return "a " + profession; }

std::vector<GenerationRecord> Sweep(const DualSpaceModels& models,
                                    const Vocabulary& vocab,
                                    std::span<const std::string> professions,
                                    const DualSpaceConfig& cfg, std::size_t n) {
  cfg.Validate();
  if (n == 0) Fail(ErrorCode::kInvalidInput, "sweep needs n >= 1");
  std::vector<GenerationRecord> out;
  out.reserve(professions.size() * n);
  for (const std::string& p : professions) {
    const PromptSpec prompt = ParsePrompt(vocab, ProfessionPrompt(p));
    DualSpaceConfig c = cfg;
    for (std::size_t i = 0; i < n; ++i) {
      c.seed = cfg.seed + i;
      out.push_back(GenerateResponsible(models, prompt, c));
    }
  }
  return out;
}

double LabelShare(std::span<const GenerationRecord> records, const std::string& aspect,
                  const std::string& attribute) {
  if (records.empty()) Fail(ErrorCode::kDegenerateInput, "no records");
  std::size_t hits = 0;
  for (const GenerationRecord& r : records) {
    const auto it = r.labels.find(aspect);
    if (it != r.labels.end() && it->second == attribute) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

CalibrationResult CalibrateGamma(const DualSpaceModels& models, const PromptSpec& prompt,
                                 const DualSpaceConfig& cfg,
                                 const CalibrationOptions& options) {
  if (options.seeds == 0 || options.iterations < 1 ||
      !(options.gamma_lo < options.gamma_hi)) {
    Fail(ErrorCode::kInvalidInput, "bad calibration options");
  }
  auto share_at = [&](double gamma) {
    DualSpaceConfig c = cfg;
    c.embedding_directives.push_back({options.aspect, options.attribute, gamma});
    std::vector<GenerationRecord> records;
    records.reserve(options.seeds);
    for (std::size_t i = 0; i < options.seeds; ++i) {
      c.seed = cfg.seed + i;
      records.push_back(GenerateResponsible(models, prompt, c));
    }
    return LabelShare(records, options.aspect, options.attribute);
  };
  double lo = options.gamma_lo;
  double hi = options.gamma_hi;
  CalibrationResult best{lo, share_at(lo)};
  if (best.share >= options.target_share) return best;
  const double top = share_at(hi);
  if (top < options.target_share) {
    Fail(ErrorCode::kConvergenceFailure,
         "target share not reachable within the gamma bracket");
  }
  auto consider = [&](double g, double s) {
    if (std::abs(s - options.target_share) <
        std::abs(best.share - options.target_share)) {
      best = {g, s};
    }
  };
  consider(hi, top);
  for (int it = 0; it < options.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = share_at(mid);
    consider(mid, s);
    if (s < options.target_share) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace dsrg
