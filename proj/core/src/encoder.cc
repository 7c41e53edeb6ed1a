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

#include "dsrg/encoder.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dsrg/error.h"
#include "dsrg/random.h"

namespace dsrg {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::vector<std::string>& DefaultProfessions() {
  static const std::vector<std::string> kProfessions = {
      "ceo",   "doctor",    "engineer",  "mechanic",    "pilot",
      "nurse", "secretary", "librarian", "hairdresser", "teacher"};
  return kProfessions;
}

void CheckDistribution(std::span<const double> p, const std::string& where) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      Fail(ErrorCode::kInvalidInput, where + ": invalid probability");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    Fail(ErrorCode::kInvalidInput,
         where + ": probabilities sum to " + std::to_string(total));
  }
}

}  // namespace

// ---------------------------------------------------------------- Vocabulary

Vocabulary Vocabulary::Build(std::vector<std::string> general,
                             std::vector<std::string> professions,
                             AspectRegistry registry) {
  Vocabulary v;
  v.general_ = std::move(general);
  v.professions_ = std::move(professions);
  v.registry_ = std::move(registry);
  v.Index();
  return v;
}

Vocabulary Vocabulary::Default() {
  return Build({"a", "photo", "of", "person"}, DefaultProfessions(),
               AspectRegistry::Default());
}

void Vocabulary::Index() {
  tokens_.clear();
  ids_.clear();
  auto add = [this](const std::string& token) {
    if (token.empty() || token.find_first_of(" \t\r\n#") != std::string::npos) {
      Fail(ErrorCode::kInvalidInput, "invalid token '" + token + "'");
    }
    if (!ids_.emplace(token, static_cast<int>(tokens_.size())).second) {
      Fail(ErrorCode::kInvalidInput, "duplicate token '" + token + "'");
    }
    tokens_.push_back(token);
  };
  for (const auto& t : general_) add(t);
  for (const auto& t : professions_) add(t);
  for (const Aspect& a : registry_.aspects()) {
    for (const auto& t : a.attributes) add(t);
  }
}

Vocabulary Vocabulary::Parse(std::string_view text) {
  std::vector<std::string> general;
  std::vector<std::string> professions;
  std::vector<std::pair<std::string, std::vector<std::string>>> aspects;
  enum class Section { kNone, kGeneral, kProfessions, kAspect } section = Section::kNone;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = Trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view header = Trim(line.substr(1));
      if (header == "general") {
        section = Section::kGeneral;
      } else if (header == "professions") {
        section = Section::kProfessions;
      } else if (header.starts_with("aspect ")) {
        section = Section::kAspect;
        aspects.emplace_back(std::string(Trim(header.substr(7))),
                             std::vector<std::string>{});
      } else {
        Fail(ErrorCode::kInvalidInput,
             "vocabulary line " + std::to_string(line_no) + ": unknown section header");
      }
      continue;
    }
    switch (section) {
      case Section::kNone:
        Fail(ErrorCode::kInvalidInput,
             "vocabulary line " + std::to_string(line_no) + ": token before any section");
      case Section::kGeneral:
        general.emplace_back(line);
        break;
      case Section::kProfessions:
        professions.emplace_back(line);
        break;
      case Section::kAspect:
        aspects.back().second.emplace_back(line);
        break;
    }
  }
  AspectRegistry registry;
  for (auto& [name, attrs] : aspects) registry.Add(name, std::move(attrs));
  return Build(std::move(general), std::move(professions), std::move(registry));
}

std::string Vocabulary::Serialize() const {
  std::ostringstream out;
  out << "# general\n";
  for (const auto& t : general_) out << t << "\n";
  out << "# professions\n";
  for (const auto& t : professions_) out << t << "\n";
  for (const Aspect& a : registry_.aspects()) {
    out << "# aspect " << a.name << "\n";
    for (const auto& t : a.attributes) out << t << "\n";
  }
  return out.str();
}

std::optional<int> Vocabulary::Find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::Id(std::string_view token) const {
  const auto id = Find(token);
  if (!id) Fail(ErrorCode::kUnknownToken, "'" + std::string(token) + "'");
  return *id;
}

const std::string& Vocabulary::Token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    Fail(ErrorCode::kUnknownToken, "id " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::IsProfession(std::string_view token) const {
  return std::find(professions_.begin(), professions_.end(), token) != professions_.end();
}

std::optional<std::pair<std::size_t, std::size_t>> Vocabulary::AttributeOf(
    std::string_view token) const {
  const auto& aspects = registry_.aspects();
  for (std::size_t k = 0; k < aspects.size(); ++k) {
    const auto& attrs = aspects[k].attributes;
    const auto it = std::find(attrs.begin(), attrs.end(), token);
    if (it != attrs.end()) {
      return std::make_pair(k, static_cast<std::size_t>(it - attrs.begin()));
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- Prompts

std::string PromptSpec::Text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

PromptSpec ParsePrompt(const Vocabulary& vocab, std::string_view text,
                       std::size_t max_length) {
  PromptSpec prompt;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    prompt.ids.push_back(vocab.Id(word));
    if (vocab.IsProfession(word)) {
      if (!prompt.profession.empty()) {
        Fail(ErrorCode::kInvalidInput, "prompt names two professions");
      }
      prompt.profession = word;
    } else if (const auto attr = vocab.AttributeOf(word)) {
      const std::string& aspect = vocab.registry().aspects()[attr->first].name;
      if (!prompt.attributes.emplace(aspect, word).second) {
        Fail(ErrorCode::kInvalidInput,
             "prompt has two attributes for aspect '" + aspect + "'");
      }
    }
    prompt.tokens.push_back(std::move(word));
  }
  if (prompt.ids.empty()) Fail(ErrorCode::kInvalidInput, "empty prompt");
  if (prompt.ids.size() > max_length) {
    Fail(ErrorCode::kInvalidInput,
         "prompt longer than " + std::to_string(max_length) + " tokens");
  }
  return prompt;
}

std::vector<PromptSpec> SamplePrompts(const Vocabulary& vocab, std::size_t n,
                                      std::uint64_t seed,
                                      const PromptSamplerOptions& options) {
  if (vocab.professions().empty()) {
    Fail(ErrorCode::kInvalidInput, "vocabulary has no professions");
  }
  Rng rng(seed);
  const auto& aspects = vocab.registry().aspects();
  std::vector<PromptSpec> prompts;
  prompts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string subject = vocab.professions()[rng.Below(vocab.professions().size())];
    if (options.generic_rate > 0.0 && vocab.Find(options.generic_subject) &&
        rng.Uniform() < options.generic_rate) {
      subject = options.generic_subject;
    }
    std::string text = "a ";
    if (options.photo_template && rng.Uniform() < 0.5) text = "a photo of a ";
    if (options.per_aspect_rate > 0.0) {
      std::size_t words = text.size() == 2 ? 2 : 5;  // template + subject
      for (const Aspect& aspect : aspects) {
        const bool add = rng.Uniform() < options.per_aspect_rate;
        const std::string& word = aspect.attributes[rng.Below(aspect.attributes.size())];
        if (add && words < options.max_length) {
          text += word + " ";
          ++words;
        }
      }
    } else if (!aspects.empty() && rng.Uniform() < options.attribute_rate) {
      const Aspect& aspect = aspects[rng.Below(aspects.size())];
      text += aspect.attributes[rng.Below(aspect.attributes.size())] + " ";
    }
    text += subject;
    prompts.push_back(ParsePrompt(vocab, text, options.max_length));
  }
  return prompts;
}

// ---------------------------------------------------------------- SkewModel

SkewModel SkewModel::Build(const Vocabulary& vocab, double strength) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "skew strength must lie in [0, 1]");
  }
  const auto& defaults = DefaultProfessions();
  const auto& aspects = vocab.registry().aspects();
  std::map<std::string, std::vector<std::vector<double>>> dists;
  for (std::size_t i = 0; i < vocab.professions().size(); ++i) {
    const std::string& prof = vocab.professions()[i];
    std::vector<std::vector<double>> per_aspect;
    for (std::size_t k = 0; k < aspects.size(); ++k) {
      const std::size_t n = aspects[k].attributes.size();
      std::size_t stereotype = (i + k) % n;
      if (aspects[k].name == "gender") {
        const auto it = std::find(defaults.begin(), defaults.end(), prof);
        if (it != defaults.end()) {
          const auto rank = static_cast<std::size_t>(it - defaults.begin());
          stereotype = rank < defaults.size() / 2 ? 0 : 1;
        } else {
          stereotype = i % n;
        }
      }
      std::vector<double> p(n, (1.0 - strength) / static_cast<double>(n));
      p[stereotype] += strength;
      per_aspect.push_back(std::move(p));
    }
    dists.emplace(prof, std::move(per_aspect));
  }
  return FromDistributions(vocab.registry(), strength, std::move(dists));
}

SkewModel SkewModel::FromDistributions(
    const AspectRegistry& registry, double strength,
    std::map<std::string, std::vector<std::vector<double>>> distributions) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "skew strength must lie in [0, 1]");
  }
  for (const auto& [prof, per_aspect] : distributions) {
    if (per_aspect.size() != registry.size()) {
      Fail(ErrorCode::kInvalidInput, "skew for '" + prof + "' has " +
                                         std::to_string(per_aspect.size()) + " aspects");
    }
    for (std::size_t k = 0; k < per_aspect.size(); ++k) {
      if (per_aspect[k].size() != registry.aspects()[k].attributes.size()) {
        Fail(ErrorCode::kInvalidInput,
             "skew for '" + prof + "' has wrong attribute count");
      }
      CheckDistribution(per_aspect[k], "skew for '" + prof + "'");
    }
  }
  SkewModel model;
  model.strength_ = strength;
  model.distributions_ = std::move(distributions);
  return model;
}

std::span<const double> SkewModel::Distribution(std::string_view profession,
                                                std::size_t aspect_index) const {
  const auto it = distributions_.find(std::string(profession));
  if (it == distributions_.end()) {
    Fail(ErrorCode::kInvalidInput,
         "no skew for profession '" + std::string(profession) + "'");
  }
  if (aspect_index >= it->second.size()) {
    Fail(ErrorCode::kInvalidInput, "aspect index out of range");
  }
  return it->second[aspect_index];
}

std::size_t SkewModel::Stereotype(std::string_view profession,
                                  std::size_t aspect_index) const {
  const auto p = Distribution(profession, aspect_index);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

// ---------------------------------------------------------------- EncoderNet

template <typename T>
BasicEncoderNet<T>::BasicEncoderNet(std::size_t vocab_size, std::size_t dim)
    : vocab_size_(vocab_size), dim_(dim) {
  params_.Add("embedding", vocab_size, dim);
  params_.Add("w1", dim, dim);
  params_.Add("b1", dim, 1);
  params_.Add("w2", dim, dim);
  params_.Add("b2", dim, 1);
}

template <typename T>
void BasicEncoderNet<T>::InitRandom(std::uint64_t seed) {
  Rng rng(seed);
  InitGaussian(params_.block(kEmbedding), 1, 0.5, rng);
  InitGaussian(params_.block(kW1), dim_, 1.0, rng);
  InitGaussian(params_.block(kW2), dim_, 1.0, rng);
  for (T& v : params_.block(kB1)) v = T{0};
  for (T& v : params_.block(kB2)) v = T{0};
}

template <typename T>
std::vector<double> BasicEncoderNet<T>::Forward(std::span<const int> ids) const {
  if (ids.empty()) Fail(ErrorCode::kInvalidInput, "empty prompt");
  std::vector<double> pooled(dim_, 0.0);
  std::vector<double> e(dim_), h1(dim_), h2(dim_);
  const auto emb = params_.block(kEmbedding);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
      Fail(ErrorCode::kUnknownToken, "token id " + std::to_string(id));
    }
    for (std::size_t j = 0; j < dim_; ++j) {
      e[j] = static_cast<double>(emb[static_cast<std::size_t>(id) * dim_ + j]);
    }
    DenseForward<T>(params_.block(kW1), params_.block(kB1), e, h1);
    TanhInPlace(h1);
    DenseForward<T>(params_.block(kW2), params_.block(kB2), h1, h2);
    TanhInPlace(h2);
    for (std::size_t j = 0; j < dim_; ++j) pooled[j] += h2[j];
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (double& v : pooled) v *= inv;
  return pooled;
}

template <typename T>
void BasicEncoderNet<T>::Backward(std::span<const int> ids, std::span<const double> dz,
                                  std::span<double> grad) const {
  const auto& blocks = params_.blocks();
  auto slice = [&](std::size_t b) {
    return grad.subspan(blocks[b].offset, blocks[b].size());
  };
  std::vector<double> e(dim_), h1(dim_), h2(dim_);
  std::vector<double> dpre2(dim_), dh1(dim_), dpre1(dim_), de(dim_);
  std::vector<double> dh2(dz.begin(), dz.end());
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (double& v : dh2) v *= inv;
  const auto emb = params_.block(kEmbedding);
  const auto g_emb = slice(kEmbedding);
  for (int id : ids) {
    const auto row = static_cast<std::size_t>(id) * dim_;
    for (std::size_t j = 0; j < dim_; ++j) e[j] = static_cast<double>(emb[row + j]);
    DenseForward<T>(params_.block(kW1), params_.block(kB1), e, h1);
    TanhInPlace(h1);
    DenseForward<T>(params_.block(kW2), params_.block(kB2), h1, h2);
    TanhInPlace(h2);
    TanhBackward(h2, dh2, dpre2);
    DenseBackward<T>(params_.block(kW2), h1, dpre2, slice(kW2), slice(kB2), dh1);
    TanhBackward(h1, dh1, dpre1);
    DenseBackward<T>(params_.block(kW1), e, dpre1, slice(kW1), slice(kB1), de);
    for (std::size_t j = 0; j < dim_; ++j) g_emb[row + j] += de[j];
  }
}

template class BasicEncoderNet<float>;
template class BasicEncoderNet<double>;

EncoderNet BuildTeacher(std::uint64_t seed, const Vocabulary& vocab,
                        const SkewModel& skew, const TeacherEncoderOptions& options) {
  const AspectRegistry& registry = vocab.registry();
  const std::size_t d = options.dim;
  const std::size_t slots = registry.TotalAttributes();
  if (d <= slots) {
    Fail(ErrorCode::kInvalidInput,
         "encoder dim " + std::to_string(d) + " leaves no content coordinates");
  }
  const std::size_t content = d - slots;
  EncoderNet net(vocab.size(), d);
  auto& params = net.params();
  Rng rng(seed);

  std::vector<std::vector<double>> aspect_content(registry.size(),
                                                  std::vector<double>(content));
  for (auto& c : aspect_content) rng.FillNormal(c, options.content_scale);

  auto emb = params.block(EncoderNet::kEmbedding);
  std::vector<double> row_content(content);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const std::string& token = vocab.Token(static_cast<int>(id));
    float* row = emb.data() + id * d;
    std::fill(row, row + d, 0.0f);
    if (const auto attr = vocab.AttributeOf(token)) {
      const auto [k, a] = *attr;
      row[registry.BlockOffset(k) + a] = static_cast<float>(options.attribute_strength);
      for (std::size_t j = 0; j < content; ++j) {
        row[slots + j] = static_cast<float>(aspect_content[k][j]);
      }
      continue;
    }
    rng.FillNormal(row_content, options.content_scale);
    for (std::size_t j = 0; j < content; ++j) {
      row[slots + j] = static_cast<float>(row_content[j]);
    }
    if (vocab.IsProfession(token)) {
      for (std::size_t k = 0; k < registry.size(); ++k) {
        const auto p = skew.Distribution(token, k);
        for (std::size_t a = 0; a < p.size(); ++a) {
          row[registry.BlockOffset(k) + a] =
              static_cast<float>(options.skew_displacement * p[a]);
        }
      }
    }
  }

  auto fill_layer = [&](std::size_t w_block, std::size_t b_block, double gain) {
    auto w = params.block(w_block);
    auto b = params.block(b_block);
    std::fill(w.begin(), w.end(), 0.0f);
    std::fill(b.begin(), b.end(), 0.0f);
    for (std::size_t s = 0; s < slots; ++s) w[s * d + s] = static_cast<float>(gain);
    const double scale = 1.0 / std::sqrt(static_cast<double>(content));
    for (std::size_t i = slots; i < d; ++i) {
      for (std::size_t j = slots; j < d; ++j) {
        w[i * d + j] = static_cast<float>(scale * rng.Normal());
      }
      b[i] = static_cast<float>(0.1 * rng.Normal());
    }
  };
  fill_layer(EncoderNet::kW1, EncoderNet::kB1, options.block_gain1);
  fill_layer(EncoderNet::kW2, EncoderNet::kB2, options.block_gain2);
  return net;
}

Vector Encode(const EncoderNet& net, const PromptSpec& prompt) {
  return Vector::FromDoubles(net.Forward(prompt.ids));
}

Matrix EncodeBatch(const EncoderNet& net, std::span<const PromptSpec> prompts) {
  std::vector<Vector> columns;
  columns.reserve(prompts.size());
  for (const auto& p : prompts) columns.push_back(Encode(net, p));
  return Matrix::FromColumns(columns);
}

double KdLossClip(const Matrix& teacher_batch, const Matrix& student_batch) {
  if (teacher_batch.rows() != student_batch.rows() ||
      teacher_batch.cols() != student_batch.cols()) {
    Fail(ErrorCode::kInvalidInput, "KdLossClip: batch shapes differ");
  }
  if (teacher_batch.cols() == 0) {
    Fail(ErrorCode::kInvalidInput, "KdLossClip: empty batch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < teacher_batch.values().size(); ++i) {
    const double diff =
        static_cast<double>(teacher_batch.values()[i]) - student_batch.values()[i];
    total += diff * diff;
  }
  return total / static_cast<double>(teacher_batch.cols());
}

template <typename T>
double KdClipLossAndGrad(const BasicEncoderNet<T>& student,
                         std::span<const PromptSpec> prompts,
                         std::span<const std::vector<double>> targets,
                         std::span<double> grad) {
  if (prompts.empty() || prompts.size() != targets.size()) {
    Fail(ErrorCode::kInvalidInput, "KdClipLossAndGrad: bad batch");
  }
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(prompts.size());
  double loss = 0.0;
  std::vector<double> dz(student.dim());
  for (std::size_t k = 0; k < prompts.size(); ++k) {
    const std::vector<double> z = student.Forward(prompts[k].ids);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double diff = targets[k][j] - z[j];
      loss += diff * diff;
      dz[j] = -2.0 * diff * inv_b;
    }
    if (!grad.empty()) student.Backward(prompts[k].ids, dz, grad);
  }
  return loss * inv_b;
}

template double KdClipLossAndGrad<float>(const BasicEncoderNet<float>&,
                                         std::span<const PromptSpec>,
                                         std::span<const std::vector<double>>,
                                         std::span<double>);
template double KdClipLossAndGrad<double>(const BasicEncoderNet<double>&,
                                          std::span<const PromptSpec>,
                                          std::span<const std::vector<double>>,
                                          std::span<double>);

RiceResult TrainRice(const EncoderNet& teacher, std::span<const PromptSpec> prompts,
                     const RiceOptions& options) {
  if (options.epochs < 1) Fail(ErrorCode::kInvalidInput, "epochs must be >= 1");
  if (!(options.lr > 0.0)) Fail(ErrorCode::kInvalidInput, "lr must be > 0");
  if (options.batch == 0) Fail(ErrorCode::kInvalidInput, "batch must be > 0");
  if (prompts.empty()) Fail(ErrorCode::kInvalidInput, "no prompts");

  std::vector<std::vector<double>> targets;
  targets.reserve(prompts.size());
  for (const auto& p : prompts) targets.push_back(teacher.Forward(p.ids));

  // Held-out split: the last fraction of a seeded shuffle.
  std::vector<std::size_t> order(prompts.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(MixSeed(options.seed, 0x5A17));
  split_rng.Shuffle(order);
  const auto n_hold = static_cast<std::size_t>(
      std::floor(options.holdout_fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> train(order.begin(), order.end() - n_hold);
  std::vector<std::size_t> hold(order.end() - n_hold, order.end());
  if (train.empty()) train = hold;
  if (hold.empty()) hold = train;

  auto gather = [&](std::span<const std::size_t> idx) {
    std::pair<std::vector<PromptSpec>, std::vector<std::vector<double>>> out;
    for (std::size_t i : idx) {
      out.first.push_back(prompts[i]);
      out.second.push_back(targets[i]);
    }
    return out;
  };
  const auto [hold_prompts, hold_targets] = gather(hold);

  RiceResult result;
  if (options.init_from_teacher) {
    result.student = teacher;
  } else {
    result.student = EncoderNet(teacher.vocab_size(), teacher.dim());
    result.student.InitRandom(MixSeed(options.seed, 1));
  }
  EncoderNet& student = result.student;
  auto holdout_loss = [&] {
    return KdClipLossAndGrad<float>(student, hold_prompts, hold_targets, {});
  };

  result.initial_holdout_loss = holdout_loss();
  result.curve.push_back({0, result.initial_holdout_loss, result.initial_holdout_loss});

  Rng rng(MixSeed(options.seed, 2));
  std::vector<double> grad(student.params().size());
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.Shuffle(train);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train.size(); start += options.batch) {
      const std::size_t end = std::min(train.size(), start + options.batch);
      const auto [bp, bt] =
          gather(std::span<const std::size_t>(train).subspan(start, end - start));
      const double loss = KdClipLossAndGrad<float>(student, bp, bt, grad);
      if (!std::isfinite(loss)) {
        Fail(ErrorCode::kTrainingDiverged,
             "RICE loss became non-finite at epoch " + std::to_string(epoch));
      }
      SgdStep(student.params(), grad, options.lr);
      epoch_loss += loss;
      ++batches;
    }
    const double hl = holdout_loss();
    if (!std::isfinite(hl)) {
      Fail(ErrorCode::kTrainingDiverged, "RICE held-out loss is non-finite");
    }
    result.curve.push_back({epoch, epoch_loss / static_cast<double>(batches), hl});
  }
  result.final_holdout_loss = result.curve.back().holdout_loss;
  return result;
}

}  // namespace dsrg
