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

#ifndef DSRG_ENCODER_H_
#define DSRG_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dsrg/aspects.h"
#include "dsrg/linalg.h"
#include "dsrg/nn.h"

namespace dsrg {

// Token table for the toy text encoder. Ids are dense in [0, size()) and
// follow file order: general words, professions, then each aspect's
// attribute words.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Throws InvalidInput when a token repeats (professions and attribute words
  // must be disjoint).
  static Vocabulary Build(std::vector<std::string> general,
                          std::vector<std::string> professions, AspectRegistry registry);
  static Vocabulary Default();

  // File format: UTF-8, one token per line; section headers are
  // `# general`, `# professions` and `# aspect <name>`.
  static Vocabulary Parse(std::string_view text);
  std::string Serialize() const;

  std::size_t size() const { return tokens_.size(); }
  std::optional<int> Find(std::string_view token) const;
  // Throws UnknownToken.
  int Id(std::string_view token) const;
  const std::string& Token(int id) const;

  const std::vector<std::string>& general() const { return general_; }
  const std::vector<std::string>& professions() const { return professions_; }
  const AspectRegistry& registry() const { return registry_; }

  bool IsProfession(std::string_view token) const;
  // (aspect index, attribute index) when `token` is an attribute word.
  std::optional<std::pair<std::size_t, std::size_t>> AttributeOf(
      std::string_view token) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.general_ == b.general_ &&
           a.professions_ == b.professions_ && a.registry_ == b.registry_;
  }

 private:
  void Index();

  std::vector<std::string> tokens_;
  std::vector<std::string> general_;
  std::vector<std::string> professions_;
  AspectRegistry registry_;
  std::unordered_map<std::string, int> ids_;
};

inline constexpr std::size_t kDefaultMaxPromptLength = 8;

struct PromptSpec {
  std::vector<int> ids;
  std::vector<std::string> tokens;
  // Empty when the prompt names no profession.
  std::string profession;
  // aspect -> attribute for every attribute word present.
  std::map<std::string, std::string> attributes;

  std::string Text() const;
  friend bool operator==(const PromptSpec&, const PromptSpec&) = default;
};

// Splits on whitespace. Throws UnknownToken for out-of-vocabulary words and
// InvalidInput for empty prompts, prompts longer than `max_length`, or two
// attribute words of the same aspect.
PromptSpec ParsePrompt(const Vocabulary& vocab, std::string_view text,
                       std::size_t max_length = kDefaultMaxPromptLength);

struct PromptSamplerOptions {
  // Probability that a prompt carries one explicit attribute word.
  double attribute_rate = 0.5;
  // When > 0, replaces attribute_rate: every aspect independently adds a word
  // with this probability (dropping trailing aspects past max_length).
  double per_aspect_rate = 0.0;
  std::size_t max_length = kDefaultMaxPromptLength;
  // Mix in the longer "a photo of a ..." template.
  bool photo_template = true;
  // Probability that the subject is the generic noun instead of a profession
  // (skipped when the vocabulary lacks it).
  double generic_rate = 0.0;
  std::string generic_subject = "person";

  friend bool operator==(const PromptSamplerOptions&,
                         const PromptSamplerOptions&) = default;
};

// Deterministic prompt list drawn from the toy template grammar.
std::vector<PromptSpec> SamplePrompts(const Vocabulary& vocab, std::size_t n,
                                      std::uint64_t seed,
                                      const PromptSamplerOptions& options = {});

// Constructed demographic skew: for each profession and aspect a categorical
// distribution (1 - s) * uniform + s * onehot(stereotype).
class SkewModel {
 public:
  SkewModel() = default;

  // Stereotypes: gender follows a fixed table for the default professions
  // (first half male) and alternates otherwise; every other aspect k assigns
  // attribute (profession_index + k) mod |A_k|.
  static SkewModel Build(const Vocabulary& vocab, double strength);

  // Explicit distributions, profession -> per-aspect probabilities in
  // registry order. Each must sum to 1 within 1e-9.
  static SkewModel FromDistributions(
      const AspectRegistry& registry, double strength,
      std::map<std::string, std::vector<std::vector<double>>> distributions);

  double strength() const { return strength_; }
  // Throws InvalidInput for unknown professions.
  std::span<const double> Distribution(std::string_view profession,
                                       std::size_t aspect_index) const;
  std::size_t Stereotype(std::string_view profession, std::size_t aspect_index) const;
  const std::map<std::string, std::vector<std::vector<double>>>& distributions() const {
    return distributions_;
  }

  friend bool operator==(const SkewModel&, const SkewModel&) = default;

 private:
  double strength_ = 0.0;
  std::map<std::string, std::vector<std::vector<double>>> distributions_;
};

// Per-token two-layer tanh network followed by mean pooling:
//   z = mean_t tanh(W2 tanh(W1 E[tok_t] + b1) + b2).
template <typename T>
class BasicEncoderNet {
 public:
  static constexpr std::size_t kEmbedding = 0;
  static constexpr std::size_t kW1 = 1;
  static constexpr std::size_t kB1 = 2;
  static constexpr std::size_t kW2 = 3;
  static constexpr std::size_t kB2 = 4;

  BasicEncoderNet() = default;
  BasicEncoderNet(std::size_t vocab_size, std::size_t dim);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  // Random initialisation for students.
  void InitRandom(std::uint64_t seed);

  template <typename U>
  BasicEncoderNet<U> Cast() const {
    BasicEncoderNet<U> out;
    out.vocab_size_ = vocab_size_;
    out.dim_ = dim_;
    out.params() = params_.template Cast<U>();
    return out;
  }

  // Pooled embedding, computed in double.
  std::vector<double> Forward(std::span<const int> ids) const;
  // Accumulates the gradient of a loss with respect to every parameter given
  // dLoss/dz for the pooled output.
  void Backward(std::span<const int> ids, std::span<const double> dz,
                std::span<double> grad) const;

  friend bool operator==(const BasicEncoderNet&, const BasicEncoderNet&) = default;

 private:
  template <typename U>
  friend class BasicEncoderNet;

  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  ParamSet<T> params_;
};

using EncoderNet = BasicEncoderNet<float>;

struct TeacherEncoderOptions {
  std::size_t dim = 32;
  // Embedding coordinate an attribute word puts on its own concept slot.
  double attribute_strength = 3.0;
  // Scale of the profession displacement along the skew distribution.
  double skew_displacement = 0.5;
  double content_scale = 0.5;
  // Diagonal gains of the two layers on concept slots.
  double block_gain1 = 1.0;
  double block_gain2 = 1.2;

  friend bool operator==(const TeacherEncoderOptions&,
                         const TeacherEncoderOptions&) = default;
};

// Frozen teacher with a constructed skew. The first TotalAttributes()
// coordinates are concept slots (one per attribute, registry order) that the
// layers act on diagonally; the remaining coordinates carry token content
// through random dense blocks. A profession token sits at
// skew_displacement * p(attribute) on each slot, so with zero skew it is
// exactly equidistant from all attributes of an aspect.
EncoderNet BuildTeacher(std::uint64_t seed, const Vocabulary& vocab,
                        const SkewModel& skew, const TeacherEncoderOptions& options = {});

// Throws UnknownToken when a prompt id is outside the network's vocabulary.
Vector Encode(const EncoderNet& net, const PromptSpec& prompt);

// Stacks encodings as columns of a d x n matrix.
Matrix EncodeBatch(const EncoderNet& net, std::span<const PromptSpec> prompts);

// (1/B) * sum_k ||teacher_k - student_k||^2 over the columns of two d x B
// batches. Throws InvalidInput on shape mismatch or B == 0.
double KdLossClip(const Matrix& teacher_batch, const Matrix& student_batch);

// Batch distillation loss against fixed teacher targets; when `grad` is
// non-empty it receives dLoss/dparams (overwritten).
template <typename T>
double KdClipLossAndGrad(const BasicEncoderNet<T>& student,
                         std::span<const PromptSpec> prompts,
                         std::span<const std::vector<double>> targets,
                         std::span<double> grad);

struct RiceOptions {
  int epochs = 50;
  std::size_t batch = 1;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.2;
  // Start the student from the teacher's weights instead of random ones.
  bool init_from_teacher = false;

  friend bool operator==(const RiceOptions&, const RiceOptions&) = default;
};

struct RiceResult {
  EncoderNet student;
  std::vector<LossPoint> curve;
  double initial_holdout_loss = 0.0;
  double final_holdout_loss = 0.0;
};

// Distils the teacher into a student of the same architecture by plain SGD
// on KdLossClip. The teacher is not modified. Throws TrainingDiverged when a
// loss becomes non-finite and InvalidInput for bad options.
RiceResult TrainRice(const EncoderNet& teacher, std::span<const PromptSpec> prompts,
                     const RiceOptions& options);

}  // namespace dsrg

#endif  // DSRG_ENCODER_H_
