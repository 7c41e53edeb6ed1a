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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dsrg/concepts.h"
#include "dsrg/diffusion.h"
#include "dsrg/encoder.h"
#include "dsrg/error.h"
#include "dsrg/eval.h"
#include "dsrg/world.h"
#include "support/test_util.h"

namespace dsrg {
namespace {

// Untrained but fully wired model set: enough to check the combination
// algebra, which does not depend on training quality.
class DualSpaceTest : public ::testing::Test {
 protected:
  DualSpaceTest()
      : vocab_(Vocabulary::Default()),
        skew_(SkewModel::Build(vocab_, 0.9)),
        world_(ToyWorld::Build(vocab_.registry(), skew_)),
        schedule_(NoiseSchedule::Cosine(20)),
        teacher_encoder_(BuildTeacher(1, vocab_, skew_)),
        rice_(teacher_encoder_),
        teacher_denoiser_(16, 32, 16),
        riidl_(16, 32, 16),
        classifier_(AttributeClassifier::FromWorld(world_)) {
    teacher_denoiser_.InitRandom(2);
    riidl_.InitRandom(3);
    ConceptSampleOptions opts;
    opts.samples_per_attribute = 8;
    opts.framed = true;
    opts.context_rate = 0.5;
    for (const char* aspect : {"gender", "age"}) {
      bank_.Add(FitConcept(vocab_.registry(), aspect,
                           EmbeddingConceptSamples(rice_, vocab_, aspect, opts),
                           ConceptSpaceTag::kEmbedding));
      bank_.Add(FitConcept(vocab_.registry(), aspect,
                           LatentConceptSamples(teacher_denoiser_, schedule_,
                                                teacher_encoder_, vocab_, aspect, opts),
                           ConceptSpaceTag::kLatent));
    }
  }

  DualSpaceModels Models() const {
    return {&schedule_, &teacher_encoder_, &rice_, &teacher_denoiser_, &riidl_,
            &bank_,     &classifier_};
  }

  PromptSpec Prompt(const std::string& text) const { return ParsePrompt(vocab_, text); }

  static DualSpaceConfig Config(double lambda_e, std::uint64_t seed = 5) {
    DualSpaceConfig cfg;
    cfg.lambda_e = lambda_e;
    cfg.lambda_d = 1.0 - lambda_e;
    cfg.seed = seed;
    return cfg;
  }

  static void Perturb(ParamSet<float>& params) {
    for (float& v : params.values()) v += 0.01f;
  }

  Vocabulary vocab_;
  SkewModel skew_;
  ToyWorld world_;
  NoiseSchedule schedule_;
  EncoderNet teacher_encoder_;
  EncoderNet rice_;
  DenoiserNet teacher_denoiser_;
  DenoiserNet riidl_;
  ConceptBank bank_;
  AttributeClassifier classifier_;
};

TEST_F(DualSpaceTest, EmbeddingEndpointEqualsPlainTeacherSampling) {
  const PromptSpec p = Prompt("a ceo");
  const GenerationRecord r = GenerateResponsible(Models(), p, Config(1.0));
  EXPECT_EQ(r.output,
            Sample(schedule_, teacher_denoiser_, Encode(teacher_encoder_, p), 5));
  EXPECT_EQ(r.prompt, "a ceo");
  EXPECT_EQ(r.seed, 5u);
  EXPECT_EQ(r.labels, classifier_.Classify(r.output));
}

TEST_F(DualSpaceTest, LatentEndpointEqualsStudentPathAlone) {
  const PromptSpec p = Prompt("a nurse");
  const DualSpaceConfig cfg = Config(0.0);
  const GenerationRecord r = GenerateResponsible(Models(), p, cfg);
  EXPECT_EQ(r.output, LatentPath(Models(), p, cfg, 5));
  EXPECT_EQ(r.output, Sample(schedule_, riidl_, Encode(teacher_encoder_, p), 5));
}

TEST_F(DualSpaceTest, EmbeddingEndpointIgnoresRiidl) {
  DualSpaceConfig cfg = Config(1.0);
  cfg.embedding_directives = {{"gender", "female", 1.0}};
  cfg.latent_directives = {{"age", "young", 2.0}};
  const PromptSpec p = Prompt("a pilot");
  const Vector before = GenerateResponsible(Models(), p, cfg).output;
  Perturb(riidl_.params());
  EXPECT_EQ(GenerateResponsible(Models(), p, cfg).output, before);
}

TEST_F(DualSpaceTest, LatentEndpointIgnoresRice) {
  DualSpaceConfig cfg = Config(0.0);
  cfg.embedding_directives = {{"gender", "female", 1.0}};
  cfg.latent_directives = {{"age", "young", 2.0}};
  const PromptSpec p = Prompt("a pilot");
  const Vector before = GenerateResponsible(Models(), p, cfg).output;
  Perturb(rice_.params());
  EXPECT_EQ(GenerateResponsible(Models(), p, cfg).output, before);
}

TEST_F(DualSpaceTest, OutputIsLinearInLambda) {
  DualSpaceConfig base = Config(0.5);
  base.embedding_directives = {{"gender", "male", 0.5}};
  base.latent_directives = {{"gender", "female", 1.0}};
  const PromptSpec p = Prompt("a teacher");
  const Vector a = EmbeddingPath(Models(), p, base, 5);
  const Vector b = LatentPath(Models(), p, base, 5);
  for (double lambda : {0.25, 0.5, 0.95}) {
    DualSpaceConfig cfg = base;
    cfg.lambda_e = lambda;
    cfg.lambda_d = 1.0 - lambda;
    const Vector out = GenerateResponsible(Models(), p, cfg).output;
    for (std::size_t j = 0; j < out.dim(); ++j) {
      // Outputs are stored in single precision.
      const double expected = lambda * a[j] + (1.0 - lambda) * b[j];
      EXPECT_NEAR(out[j], expected, 1e-6 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_F(DualSpaceTest, ZeroGammaDirectivesAreIdentity) {
  DualSpaceConfig cfg = Config(1.0);
  cfg.embedding_directives = {{"gender", "female", 0.0}};
  const PromptSpec p = Prompt("a ceo");
  EXPECT_EQ(GenerateResponsible(Models(), p, cfg).output,
            GenerateResponsible(Models(), p, Config(1.0)).output);
}

TEST_F(DualSpaceTest, LatentStateTargetAlsoSupported) {
  DualSpaceConfig cfg = Config(0.0);
  cfg.latent_directives = {{"gender", "female", 1.0}};
  cfg.window = {0.0, 1.0};
  const PromptSpec p = Prompt("a ceo");
  const Vector noise_target = LatentPath(Models(), p, cfg, 5);
  cfg.latent_target = HookTarget::kState;
  const Vector state_target = LatentPath(Models(), p, cfg, 5);
  EXPECT_NE(noise_target, state_target);
  EXPECT_NE(noise_target, LatentPath(Models(), p, Config(0.0), 5));
}

TEST_F(DualSpaceTest, ConfigValidation) {
  DualSpaceConfig cfg = Config(0.95);
  EXPECT_NO_THROW(cfg.Validate());
  cfg.lambda_d = 0.1;
  EXPECT_DSRG_ERROR(cfg.Validate(), ErrorCode::kInvalidConfig);
  cfg = Config(1.2);
  EXPECT_DSRG_ERROR(cfg.Validate(), ErrorCode::kInvalidConfig);
  cfg = Config(0.5);
  cfg.window = {0.8, 0.2};
  EXPECT_DSRG_ERROR(GenerateResponsible(Models(), Prompt("a ceo"), cfg),
                    ErrorCode::kInvalidConfig);
}

TEST_F(DualSpaceTest, Describe) {
  DualSpaceConfig cfg;
  cfg.embedding_directives = {{"gender", "female", 1.5}};
  EXPECT_EQ(cfg.Describe(),
            "lambda_e=0.95 lambda_d=0.05 window=0.7:1 target=noise "
            "embedding=gender/female:1.5");
}

TEST_F(DualSpaceTest, ResolveDirectivesErrors) {
  const std::vector<DirectiveSpec> race = {{"race", "asian", 1.0}};
  EXPECT_DSRG_ERROR(ResolveDirectives(bank_, race, ConceptSpaceTag::kEmbedding),
                    ErrorCode::kMissingArtifact);
  const std::vector<DirectiveSpec> bad = {{"gender", "robot", 1.0}};
  EXPECT_DSRG_ERROR(ResolveDirectives(bank_, bad, ConceptSpaceTag::kEmbedding),
                    ErrorCode::kInvalidInput);
  const std::vector<DirectiveSpec> ok = {{"gender", "female", 1.0}};
  const auto resolved = ResolveDirectives(bank_, ok, ConceptSpaceTag::kLatent);
  ASSERT_EQ(resolved.size(), 1u);
  EXPECT_EQ(resolved[0].space->tag(), ConceptSpaceTag::kLatent);
}

TEST_F(DualSpaceTest, MismatchedDimsAreInvalidInput) {
  DenoiserNet wide(12, 32, 16);
  wide.InitRandom(9);
  DualSpaceModels models = Models();
  models.riidl = &wide;
  EXPECT_DSRG_ERROR(GenerateResponsible(models, Prompt("a ceo"), Config(0.5)),
                    ErrorCode::kInvalidInput);
}

TEST_F(DualSpaceTest, SweepCountsAndDeterminism) {
  const std::vector<std::string> one = {"ceo"};
  const auto single = Sweep(Models(), vocab_, one, Config(0.95), 1);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].prompt, ProfessionPrompt("ceo"));

  const std::vector<std::string> five = {"ceo", "doctor", "nurse", "pilot", "teacher"};
  const auto a = Sweep(Models(), vocab_, five, Config(0.95), 100);
  ASSERT_EQ(a.size(), 500u);
  std::map<std::string, int> per;
  for (const auto& r : a) ++per[r.prompt];
  for (const auto& p : five) EXPECT_EQ(per[ProfessionPrompt(p)], 100);
  EXPECT_EQ(a[101].seed, 6u);
  EXPECT_EQ(a, Sweep(Models(), vocab_, five, Config(0.95), 100));
  EXPECT_DSRG_ERROR(Sweep(Models(), vocab_, five, Config(0.95), 0),
                    ErrorCode::kInvalidInput);
}

TEST_F(DualSpaceTest, LabelShare) {
  std::vector<GenerationRecord> records(4);
  records[0].labels = {{"gender", "female"}};
  records[1].labels = {{"gender", "male"}};
  records[2].labels = {{"gender", "female"}};
  records[3].labels = {{"gender", "female"}};
  EXPECT_DOUBLE_EQ(LabelShare(records, "gender", "female"), 0.75);
  EXPECT_DOUBLE_EQ(LabelShare(records, "age", "young"), 0.0);
}

TEST_F(DualSpaceTest, CalibrationRejectsUnreachableTarget) {
  CalibrationOptions opts;
  opts.attribute = "female";
  opts.target_share = 1.5;
  opts.seeds = 4;
  opts.iterations = 2;
  EXPECT_DSRG_ERROR(CalibrateGamma(Models(), Prompt("a ceo"), Config(0.95), opts),
                    ErrorCode::kConvergenceFailure);
  opts.gamma_hi = opts.gamma_lo;
  EXPECT_DSRG_ERROR(CalibrateGamma(Models(), Prompt("a ceo"), Config(0.95), opts),
                    ErrorCode::kInvalidInput);
}

}  // namespace
}  // namespace dsrg
