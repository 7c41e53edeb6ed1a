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

#ifndef DSRG_CONCEPTS_H_
#define DSRG_CONCEPTS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsrg/aspects.h"
#include "dsrg/diffusion.h"
#include "dsrg/encoder.h"
#include "dsrg/linalg.h"

namespace dsrg {

enum class ConceptSpaceTag { kEmbedding, kLatent };

std::string_view ConceptSpaceTagName(ConceptSpaceTag tag);
// Throws InvalidInput for anything but "embedding" / "latent".
ConceptSpaceTag ParseConceptSpaceTag(std::string_view name);

// Weight on the raw mean in z_resp = f * z_distill + (1 - f) * z_zca; alpha
// for embedding spaces, beta for latent ones.
struct BlendParams {
  double alpha = 0.9;
  double beta = 0.9;

  double For(ConceptSpaceTag tag) const {
    return tag == ConceptSpaceTag::kEmbedding ? alpha : beta;
  }

  friend bool operator==(const BlendParams&, const BlendParams&) = default;
};

// Default whitening regulariser, relative to the largest pooled eigenvalue.
inline constexpr double kDefaultRelativeEps = 1e-5;

struct AttributeConcept {
  std::string name;
  std::size_t count = 0;
  Vector distill;
  Vector zca;
  Vector resp;

  friend bool operator==(const AttributeConcept&, const AttributeConcept&) = default;
};

// One aspect's whitened concept set in either the embedding or the latent
// space. Attributes follow registry order.
class ConceptSpace {
 public:
  ConceptSpace() = default;
  // Assembles a space from stored parts (checkpoint load); checks dims and the
  // blend identity.
  ConceptSpace(std::string aspect, ConceptSpaceTag tag, double blend, Vector mean,
               Matrix whitening, std::vector<AttributeConcept> attributes);

  const std::string& aspect() const { return aspect_; }
  ConceptSpaceTag tag() const { return tag_; }
  double blend() const { return blend_; }
  std::size_t dim() const { return mean_.dim(); }
  const Vector& mean() const { return mean_; }
  const Matrix& whitening() const { return whitening_; }
  const std::vector<AttributeConcept>& attributes() const { return attributes_; }
  // Throws InvalidInput for an attribute the space does not hold.
  const AttributeConcept& attribute(std::string_view name) const;

  friend bool operator==(const ConceptSpace&, const ConceptSpace&) = default;

 private:
  std::string aspect_;
  ConceptSpaceTag tag_ = ConceptSpaceTag::kEmbedding;
  double blend_ = 0.0;
  Vector mean_;
  Matrix whitening_;
  std::vector<AttributeConcept> attributes_;
};

// Fits one aspect from per-attribute d x n sample stacks. The covariance is
// pooled over every attribute's samples; eps is relative to its largest
// eigenvalue. Throws DegenerateInput when an attribute has fewer than two
// samples (or none) and InvalidInput for unknown attributes or mixed dims.
ConceptSpace FitConcept(const AspectRegistry& registry, std::string_view aspect,
                        const std::map<std::string, Matrix>& samples, ConceptSpaceTag tag,
                        const BlendParams& blend = {},
                        double relative_eps = kDefaultRelativeEps);

struct Directive {
  const ConceptSpace* space = nullptr;
  std::string attribute;
  double gamma = 0.0;
};

// z + sum_k gamma_k * resp_k. Throws SpaceMismatch for latent spaces and
// InvalidInput for dim mismatches.
Vector ModulateEmbedding(const Vector& z, std::span<const Directive> directives);

// Same sum on a diffusion latent when tau / steps lies in `window`; identity
// otherwise. Throws SpaceMismatch for embedding spaces.
Vector ModulateLatent(const Vector& x, std::span<const Directive> directives, int tau,
                      int steps, const InjectionWindow& window);

// k x k grid of two-directive lists with gamma_a = i / (k - 1) and
// gamma_b = j / (k - 1). Throws InvalidInput for k < 2.
std::vector<std::vector<std::vector<Directive>>> InterpolateConcepts(
    const ConceptSpace& space_a, std::string_view attr_a, const ConceptSpace& space_b,
    std::string_view attr_b, std::size_t k);

// Holds fitted spaces keyed by (tag, aspect).
class ConceptBank {
 public:
  void Add(ConceptSpace space);
  bool Has(ConceptSpaceTag tag, std::string_view aspect) const;
  // Throws MissingArtifact.
  const ConceptSpace& Get(ConceptSpaceTag tag, std::string_view aspect) const;
  const std::vector<ConceptSpace>& spaces() const { return spaces_; }

  friend bool operator==(const ConceptBank&, const ConceptBank&) = default;

 private:
  std::vector<ConceptSpace> spaces_;
};

struct ConceptSampleOptions {
  std::size_t samples_per_attribute = 200;
  // Noun after the attribute word; empty leaves the attribute as the last
  // word ("a photo of a female").
  std::string subject;
  // Probability of adding one attribute word of another aspect.
  double context_rate = 0.0;
  // Lead the prompt with "a " or "a photo of a ". Off by default: the
  // function words' content would ride along on every concept vector.
  bool framed = false;
  std::uint64_t seed = 0;
  // Noise-time fraction at which latent concepts are read off the denoiser.
  double latent_time = 0.85;

  friend bool operator==(const ConceptSampleOptions&,
                         const ConceptSampleOptions&) = default;
};

// Prompts for the concept sets: each carries the attribute word, the optional
// subject noun, a random template when framed, and with probability
// context_rate one attribute word of a different aspect. Index i uses the
// same frame for every attribute.
std::map<std::string, std::vector<PromptSpec>> ConceptPrompts(
    const Vocabulary& vocab, std::string_view aspect,
    const ConceptSampleOptions& options);

// Embedding samples: encoder outputs of ConceptPrompts.
std::map<std::string, Matrix> EmbeddingConceptSamples(
    const EncoderNet& encoder, const Vocabulary& vocab, std::string_view aspect,
    const ConceptSampleOptions& options);

// Latent samples: denoiser noise predictions at latent_time for
// attribute-conditioned prompts (conditions from `encoder`). The x_tau draws
// are shared across attributes so their differences isolate the condition.
std::map<std::string, Matrix> LatentConceptSamples(const DenoiserNet& denoiser,
                                                   const NoiseSchedule& schedule,
                                                   const EncoderNet& encoder,
                                                   const Vocabulary& vocab,
                                                   std::string_view aspect,
                                                   const ConceptSampleOptions& options);

}  // namespace dsrg

#endif  // DSRG_CONCEPTS_H_
