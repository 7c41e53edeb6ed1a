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

#include "dsrg/concepts.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dsrg/error.h"
#include "dsrg/random.h"

namespace dsrg {
namespace {

Vector Blend(double f, const Vector& distill, const Vector& zca) {
  Vector out(distill.dim());
  for (std::size_t i = 0; i < out.dim(); ++i) {
    out[i] = static_cast<float>(f * static_cast<double>(distill[i]) +
                                (1.0 - f) * static_cast<double>(zca[i]));
  }
  return out;
}

Vector ApplyDirectives(const Vector& z, std::span<const Directive> directives,
                       ConceptSpaceTag expected) {
  std::vector<double> acc = z.ToDoubles();
  for (const Directive& d : directives) {
    if (d.space == nullptr) Fail(ErrorCode::kInvalidInput, "directive without space");
    if (d.space->tag() != expected) {
      Fail(ErrorCode::kSpaceMismatch,
           "directive on " + std::string(ConceptSpaceTagName(d.space->tag())) +
               " space '" + d.space->aspect() + "' used in " +
               std::string(ConceptSpaceTagName(expected)) + " space");
    }
    const Vector& resp = d.space->attribute(d.attribute).resp;
    if (resp.dim() != z.dim()) {
      Fail(ErrorCode::kInvalidInput, "directive dim " + std::to_string(resp.dim()) +
                                         " != " + std::to_string(z.dim()));
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d.gamma * resp[i];
  }
  return Vector::FromDoubles(acc);
}

}  // namespace

std::string_view ConceptSpaceTagName(ConceptSpaceTag tag) {
  return tag == ConceptSpaceTag::kEmbedding ? "embedding" : "latent";
}

ConceptSpaceTag ParseConceptSpaceTag(std::string_view name) {
  if (name == "embedding") return ConceptSpaceTag::kEmbedding;
  if (name == "latent") return ConceptSpaceTag::kLatent;
  Fail(ErrorCode::kInvalidInput, "unknown concept space '" + std::string(name) + "'");
}

ConceptSpace::ConceptSpace(std::string aspect, ConceptSpaceTag tag, double blend,
                           Vector mean, Matrix whitening,
                           std::vector<AttributeConcept> attributes)
    : aspect_(std::move(aspect)),
      tag_(tag),
      blend_(blend),
      mean_(std::move(mean)),
      whitening_(std::move(whitening)),
      attributes_(std::move(attributes)) {
  const std::size_t d = mean_.dim();
  if (!(blend_ >= 0.0 && blend_ <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "blend factor must lie in [0, 1]");
  }
  if (whitening_.rows() != d || whitening_.cols() != d) {
    Fail(ErrorCode::kInvalidInput, "whitening shape does not match mean");
  }
  if (attributes_.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "concept space needs >= 2 attributes");
  }
  for (const AttributeConcept& a : attributes_) {
    if (a.distill.dim() != d || a.zca.dim() != d || a.resp.dim() != d) {
      Fail(ErrorCode::kInvalidInput, "attribute '" + a.name + "' has wrong dim");
    }
    if (!(Blend(blend_, a.distill, a.zca) == a.resp)) {
      Fail(ErrorCode::kInvalidInput,
           "attribute '" + a.name + "' violates the blend identity");
    }
  }
}

const AttributeConcept& ConceptSpace::attribute(std::string_view name) const {
  for (const AttributeConcept& a : attributes_) {
    if (a.name == name) return a;
  }
  Fail(ErrorCode::kInvalidInput,
       "concept space '" + aspect_ + "' has no attribute '" + std::string(name) + "'");
}

ConceptSpace FitConcept(const AspectRegistry& registry, std::string_view aspect,
                        const std::map<std::string, Matrix>& samples, ConceptSpaceTag tag,
                        const BlendParams& blend, double relative_eps) {
  const Aspect& spec = registry.aspect(aspect);
  for (const auto& [name, m] : samples) {
    registry.AttributeIndex(aspect, name);  // throws for strangers
    (void)m;
  }
  if (!(relative_eps >= 0.0)) Fail(ErrorCode::kInvalidInput, "eps must be >= 0");
  std::size_t dim = 0;
  std::size_t total = 0;
  for (const std::string& attr : spec.attributes) {
    const auto it = samples.find(attr);
    if (it == samples.end() || it->second.cols() < 2) {
      Fail(ErrorCode::kDegenerateInput,
           "attribute '" + attr + "' needs at least two samples");
    }
    if (dim == 0) dim = it->second.rows();
    if (it->second.rows() != dim) {
      Fail(ErrorCode::kInvalidInput, "concept samples have mixed dims");
    }
    total += it->second.cols();
  }

  // Pool every attribute's columns for the shared whitening transform.
  Matrix pooled(dim, total);
  std::size_t col = 0;
  for (const std::string& attr : spec.attributes) {
    const Matrix& m = samples.at(attr);
    for (std::size_t c = 0; c < m.cols(); ++c, ++col) {
      for (std::size_t r = 0; r < dim; ++r) pooled(r, col) = m(r, c);
    }
  }
  const MeanCovariance stats = Covariance(pooled);
  const double top = std::max(0.0, static_cast<double>(SymEig(stats.cov).values[0]));
  double eps = relative_eps * top;
  if (eps == 0.0 && relative_eps > 0.0) eps = relative_eps;  // all-zero spread
  const Matrix w = ZcaMatrix(stats.cov, eps);

  const double f = blend.For(tag);
  if (!(f >= 0.0 && f <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "blend factor must lie in [0, 1]");
  }
  std::vector<AttributeConcept> attrs;
  for (const std::string& attr : spec.attributes) {
    const Matrix& m = samples.at(attr);
    AttributeConcept a;
    a.name = attr;
    a.count = m.cols();
    std::vector<double> mean(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) mean[r] += m(r, c);
      mean[r] /= static_cast<double>(m.cols());
    }
    a.distill = Vector::FromDoubles(mean);
    std::vector<double> centered(dim);
    for (std::size_t r = 0; r < dim; ++r) {
      centered[r] = static_cast<double>(a.distill[r]) - stats.mean[r];
    }
    std::vector<double> zca(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) zca[r] += w(r, c) * centered[c];
    }
    a.zca = Vector::FromDoubles(zca);
    a.resp = Blend(f, a.distill, a.zca);
    attrs.push_back(std::move(a));
  }
  return ConceptSpace(spec.name, tag, f, stats.mean, w, std::move(attrs));
}

Vector ModulateEmbedding(const Vector& z, std::span<const Directive> directives) {
  return ApplyDirectives(z, directives, ConceptSpaceTag::kEmbedding);
}

Vector ModulateLatent(const Vector& x, std::span<const Directive> directives, int tau,
                      int steps, const InjectionWindow& window) {
  window.Validate();
  if (steps < 1 || tau < 0 || tau > steps) {
    Fail(ErrorCode::kInvalidInput, "step outside the schedule");
  }
  // Validate tags even when the window is closed.
  for (const Directive& d : directives) {
    if (d.space != nullptr && d.space->tag() != ConceptSpaceTag::kLatent) {
      Fail(ErrorCode::kSpaceMismatch, "embedding-space directive on a latent");
    }
  }
  if (!window.Contains(tau, steps)) return x;
  return ApplyDirectives(x, directives, ConceptSpaceTag::kLatent);
}

std::vector<std::vector<std::vector<Directive>>> InterpolateConcepts(
    const ConceptSpace& space_a, std::string_view attr_a, const ConceptSpace& space_b,
    std::string_view attr_b, std::size_t k) {
  if (k < 2) Fail(ErrorCode::kInvalidInput, "interpolation grid needs k >= 2");
  space_a.attribute(attr_a);
  space_b.attribute(attr_b);
  const double step = 1.0 / static_cast<double>(k - 1);
  std::vector<std::vector<std::vector<Directive>>> grid(
      k, std::vector<std::vector<Directive>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      grid[i][j] = {{&space_a, std::string(attr_a), static_cast<double>(i) * step},
                    {&space_b, std::string(attr_b), static_cast<double>(j) * step}};
    }
  }
  return grid;
}

void ConceptBank::Add(ConceptSpace space) {
  for (ConceptSpace& s : spaces_) {
    if (s.tag() == space.tag() && s.aspect() == space.aspect()) {
      s = std::move(space);
      return;
    }
  }
  spaces_.push_back(std::move(space));
}

bool ConceptBank::Has(ConceptSpaceTag tag, std::string_view aspect) const {
  return std::any_of(spaces_.begin(), spaces_.end(), [&](const ConceptSpace& s) {
    return s.tag() == tag && s.aspect() == aspect;
  });
}

const ConceptSpace& ConceptBank::Get(ConceptSpaceTag tag, std::string_view aspect) const {
  for (const ConceptSpace& s : spaces_) {
    if (s.tag() == tag && s.aspect() == aspect) return s;
  }
  Fail(ErrorCode::kMissingArtifact, "no " + std::string(ConceptSpaceTagName(tag)) +
                                        " concepts for aspect '" + std::string(aspect) +
                                        "'");
}

std::map<std::string, std::vector<PromptSpec>> ConceptPrompts(
    const Vocabulary& vocab, std::string_view aspect,
    const ConceptSampleOptions& options) {
  const AspectRegistry& registry = vocab.registry();
  const std::size_t own = registry.AspectIndex(aspect);
  if (options.samples_per_attribute < 2) {
    Fail(ErrorCode::kDegenerateInput, "need at least two samples per attribute");
  }
  if (!options.subject.empty()) vocab.Id(options.subject);  // throws if unknown
  Rng rng(MixSeed(options.seed, 0xC0));
  std::map<std::string, std::vector<PromptSpec>> out;
  for (std::size_t i = 0; i < options.samples_per_attribute; ++i) {
    // One frame per index, shared by every attribute.
    const bool photo = rng.Uniform() < 0.5;
    const std::string frame = !options.framed ? "" : photo ? "a photo of a " : "a ";
    std::string other;
    if (registry.size() > 1 && rng.Uniform() < options.context_rate) {
      std::size_t k = rng.Below(registry.size() - 1);
      if (k >= own) ++k;
      const auto& attrs = registry.aspects()[k].attributes;
      other = attrs[rng.Below(attrs.size())];
    }
    for (const std::string& attr : registry.aspects()[own].attributes) {
      std::string text = frame;
      if (!other.empty()) text += other + " ";
      text += attr;
      if (!options.subject.empty()) text += " " + options.subject;
      out[attr].push_back(ParsePrompt(vocab, text));
    }
  }
  return out;
}

std::map<std::string, Matrix> EmbeddingConceptSamples(
    const EncoderNet& encoder, const Vocabulary& vocab, std::string_view aspect,
    const ConceptSampleOptions& options) {
  std::map<std::string, Matrix> out;
  for (const auto& [attr, prompts] : ConceptPrompts(vocab, aspect, options)) {
    out.emplace(attr, EncodeBatch(encoder, prompts));
  }
  return out;
}

std::map<std::string, Matrix> LatentConceptSamples(const DenoiserNet& denoiser,
                                                   const NoiseSchedule& schedule,
                                                   const EncoderNet& encoder,
                                                   const Vocabulary& vocab,
                                                   std::string_view aspect,
                                                   const ConceptSampleOptions& options) {
  if (!(options.latent_time > 0.0 && options.latent_time <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "latent_time must lie in (0, 1]");
  }
  const int steps = schedule.steps();
  const int tau =
      std::clamp(static_cast<int>(std::lround(options.latent_time * steps)), 1, steps);
  const double t = static_cast<double>(tau) / steps;
  const auto prompts = ConceptPrompts(vocab, aspect, options);
  const std::size_t n = options.samples_per_attribute;
  const std::size_t m = denoiser.latent_dim();

  Rng rng(MixSeed(options.seed, 0xD1));
  std::vector<std::vector<double>> draws(n, std::vector<double>(m));
  for (auto& x : draws) rng.FillNormal(x);

  std::map<std::string, Matrix> out;
  for (const auto& [attr, list] : prompts) {
    Matrix stack(m, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> eps =
          denoiser.Forward(draws[i], t, Encode(encoder, list[i]).ToDoubles());
      for (std::size_t r = 0; r < m; ++r) stack(r, i) = static_cast<float>(eps[r]);
    }
    out.emplace(attr, std::move(stack));
  }
  return out;
}

}  // namespace dsrg
