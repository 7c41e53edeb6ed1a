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

#include "dsrg/diffusion.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dsrg/encoder.h"
#include "dsrg/error.h"
#include "dsrg/random.h"
#include "dsrg/world.h"
#include "support/test_util.h"

namespace dsrg {
namespace {

using ::dsrg::testing::CentralDifference;
using ::dsrg::testing::RelativeError;

DenoiserNet RandomDenoiser(std::size_t m, std::size_t d, std::size_t width,
                           std::uint64_t seed) {
  DenoiserNet net(m, d, width);
  net.InitRandom(seed);
  return net;
}

Vector RandomVector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  rng.FillNormal(v);
  return Vector::FromDoubles(v);
}

TEST(NoiseScheduleTest, CosineEndpointsAndMonotonicity) {
  const NoiseSchedule s = NoiseSchedule::Cosine(100);
  EXPECT_NEAR(s.alpha_bar(0), 1.0, 1e-3);
  EXPECT_LT(s.alpha_bar(100), 0.01);
  for (int tau = 1; tau <= 100; ++tau) {
    EXPECT_LT(s.alpha_bar(tau), s.alpha_bar(tau - 1));
    EXPECT_LT(s.log_snr(tau), s.log_snr(tau - 1));
    EXPECT_GT(s.alpha(tau), 0.0);
    EXPECT_LE(s.alpha(tau), 1.0);
    EXPECT_LE(SnrWeight(s, tau, 5.0), 5.0);
  }
}

TEST(NoiseScheduleTest, FromAlphaBarValidates) {
  EXPECT_DSRG_ERROR(NoiseSchedule::FromAlphaBar({0.9}), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(NoiseSchedule::FromAlphaBar({0.9, 0.95}), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(NoiseSchedule::FromAlphaBar({1.0, 0.5}), ErrorCode::kInvalidInput);
  const NoiseSchedule s = NoiseSchedule::Cosine(10);
  EXPECT_DSRG_ERROR(s.alpha_bar(11), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(s.alpha(0), ErrorCode::kInvalidInput);
}

TEST(ForwardDiffuseTest, EndpointsAndZeroNoise) {
  const NoiseSchedule s = NoiseSchedule::Cosine(100);
  Rng rng(1);
  const Vector x0 = RandomVector(16, rng);
  const Vector noise = RandomVector(16, rng);
  const double ab0 = s.alpha_bar(0);
  EXPECT_GT(ab0, 1.0 - 1e-3);
  const Vector near_clean = ForwardDiffuse(s, x0, 0, noise);
  for (std::size_t j = 0; j < 16; ++j) {
    EXPECT_NEAR(near_clean[j], std::sqrt(ab0) * x0[j] + std::sqrt(1.0 - ab0) * noise[j],
                1e-6);
  }
  const Vector zero(16);
  for (int tau : {0, 1, 37, 100}) {
    const Vector out = ForwardDiffuse(s, x0, tau, zero);
    for (std::size_t j = 0; j < 16; ++j) {
      EXPECT_EQ(out[j], static_cast<float>(std::sqrt(s.alpha_bar(tau)) * x0[j]));
    }
  }
  EXPECT_DSRG_ERROR(ForwardDiffuse(s, x0, 101, noise), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(ForwardDiffuse(s, x0, -1, noise), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(ForwardDiffuse(s, x0, 3, Vector(4)), ErrorCode::kInvalidInput);
}

TEST(ForwardDiffuseTest, FinalStepIsPureNoiseInExpectation) {
  const NoiseSchedule s = NoiseSchedule::Cosine(100);
  Rng rng(2);
  const Vector x0{3, -2, 1, 0.5};
  std::vector<double> s1(4, 0.0), s2(4, 0.0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Vector out = ForwardDiffuse(s, x0, 100, RandomVector(4, rng));
    for (std::size_t j = 0; j < 4; ++j) {
      s1[j] += out[j];
      s2[j] += double{out[j]} * out[j];
    }
  }
  for (std::size_t j = 0; j < 4; ++j) {
    const double mean = s1[j] / n;
    EXPECT_NEAR(mean, 0.0, 0.05);
    EXPECT_NEAR(s2[j] / n - mean * mean, 1.0, 0.05);
  }
}

TEST(SnrWeightTest, CapAndFormula) {
  const NoiseSchedule s = NoiseSchedule::FromAlphaBar({0.9999, 0.999, 0.5, 0.005});
  EXPECT_EQ(SnrWeight(s, 1, 5.0), 5.0);
  EXPECT_NEAR(SnrWeight(s, 3, 5.0), 0.005 / 0.995, 1e-15);
  EXPECT_NEAR(SnrWeight(s, 2, 5.0), 1.0, 1e-12);
  EXPECT_DSRG_ERROR(SnrWeight(s, 2, 0.0), ErrorCode::kInvalidInput);
}

TEST(DrawStepTest, CoversOneThroughT) {
  const NoiseSchedule s = NoiseSchedule::Cosine(10);
  Rng rng(3);
  std::vector<int> hits(11, 0);
  for (int i = 0; i < 5000; ++i) ++hits[DrawStep(s, rng)];
  EXPECT_EQ(hits[0], 0);
  for (int tau = 1; tau <= 10; ++tau) EXPECT_NEAR(hits[tau] / 5000.0, 0.1, 0.02);
}

TEST(TimeEmbeddingTest, Values) {
  std::vector<double> e(kTimeEmbeddingDim);
  TimeEmbedding(0.0, e);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_EQ(e[1], 1.0);
  TimeEmbedding(0.5, e);
  EXPECT_NEAR(e[0], 1.0, 1e-15);
  EXPECT_NEAR(e[1], 0.0, 1e-15);
}

std::vector<DiffusionItem> RandomItems(std::size_t n, std::size_t m, std::size_t d,
                                       int steps, Rng& rng) {
  std::vector<DiffusionItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    items.push_back({RandomVector(m, rng), 1 + static_cast<int>(rng.Below(steps)),
                     RandomVector(d, rng)});
  }
  return items;
}

TEST(KdLossUnetTest, IdenticalNetworksGiveZero) {
  const NoiseSchedule s = NoiseSchedule::Cosine(20);
  const DenoiserNet net = RandomDenoiser(4, 3, 8, 1);
  Rng rng(4);
  EXPECT_EQ(KdLossUnet(s, net, net, RandomItems(5, 4, 3, 20, rng), 5.0), 0.0);
}

TEST(KdLossUnetTest, UnitDisplacementWithUnitWeight) {
  const NoiseSchedule s = NoiseSchedule::Cosine(20);
  const DenoiserNet teacher = RandomDenoiser(4, 3, 8, 1);
  DenoiserNet student = teacher;
  student.params().block(DenoiserNet::kB3)[2] += 1.0f;
  Rng rng(5);
  // Step 1 has SNR far above 1, so a cap of 1 makes the weight exactly 1.
  const std::vector<DiffusionItem> item = {
      {RandomVector(4, rng), 1, RandomVector(3, rng)}};
  ASSERT_EQ(SnrWeight(s, 1, 1.0), 1.0);
  EXPECT_NEAR(KdLossUnet(s, teacher, student, item, 1.0), 1.0, 1e-6);
}

TEST(KdLossUnetTest, MatchesPerItemOracle) {
  const NoiseSchedule s = NoiseSchedule::Cosine(20);
  const DenoiserNet teacher = RandomDenoiser(4, 3, 8, 1);
  const DenoiserNet student = RandomDenoiser(4, 3, 8, 2);
  Rng rng(6);
  const auto items = RandomItems(4, 4, 3, 20, rng);
  double oracle = 0.0;
  for (const DiffusionItem& it : items) {
    const Vector a = PredictNoise(teacher, s, it.x, it.tau, it.condition);
    const Vector b = PredictNoise(student, s, it.x, it.tau, it.condition);
    double sq = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      sq += (double{a[j]} - b[j]) * (double{a[j]} - b[j]);
    oracle += SnrWeight(s, it.tau, 5.0) * sq;
  }
  oracle /= 4.0;
  EXPECT_NEAR(KdLossUnet(s, teacher, student, items, 5.0), oracle, 1e-6);
}

TEST(KdLossUnetTest, ShapeErrors) {
  const NoiseSchedule s = NoiseSchedule::Cosine(20);
  const DenoiserNet a = RandomDenoiser(4, 3, 8, 1);
  const DenoiserNet b = RandomDenoiser(5, 3, 8, 1);
  Rng rng(7);
  const auto items = RandomItems(2, 4, 3, 20, rng);
  EXPECT_DSRG_ERROR(KdLossUnet(s, a, b, items, 5.0), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR(KdLossUnet(s, a, a, {}, 5.0), ErrorCode::kInvalidInput);
  const auto bad = RandomItems(2, 4, 2, 20, rng);
  EXPECT_DSRG_ERROR(KdLossUnet(s, a, a, bad, 5.0), ErrorCode::kInvalidInput);
}

TEST(KdLossUnetTest, AnalyticGradientMatchesFiniteDifferences) {
  const NoiseSchedule s = NoiseSchedule::Cosine(20);
  BasicDenoiserNet<double> student = RandomDenoiser(4, 3, 8, 3).Cast<double>();
  Rng rng(8);
  const auto items = RandomItems(6, 4, 3, 20, rng);
  std::vector<std::vector<double>> targets(items.size(), std::vector<double>(4));
  for (auto& t : targets) rng.FillNormal(t);
  std::vector<double> grad(student.params().size());
  KdUnetLossAndGrad<double>(s, student, items, targets, 5.0, grad);
  auto loss = [&] {
    return KdUnetLossAndGrad<double>(s, student, items, targets, 5.0, {});
  };
  ASSERT_GE(grad.size(), 200u);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double numeric = CentralDifference(student.params().values(), i, 1e-5, loss);
    EXPECT_LT(RelativeError(grad[i], numeric, 1e-6), 1e-4)
        << "param " << i << " analytic " << grad[i] << " numeric " << numeric;
  }
}

// Small shared fixture: a random teacher encoder and denoiser on the default
// world, enough for training-mechanics tests.
struct SmallSetup {
  Vocabulary vocab = Vocabulary::Default();
  SkewModel skew = SkewModel::Build(vocab, 0.9);
  ToyWorld world = ToyWorld::Build(vocab.registry(), skew);
  EncoderNet encoder = BuildTeacher(1, vocab, skew);
  NoiseSchedule schedule = NoiseSchedule::Cosine(100);
  ConditionSource source =
      MakeConditionSource(world, encoder, SamplePrompts(vocab, 200, 2));
  DenoiserNet teacher = RandomDenoiser(16, 32, 64, 4);
};

TEST(TrainRiidlTest, TeacherInitIsAFixedPoint) {
  const SmallSetup setup;
  RiidlOptions opts;
  opts.epochs = 2;
  opts.samples_per_epoch = 64;
  opts.init_from_teacher = true;
  const auto r = TrainRiidl(setup.teacher, setup.source, setup.schedule, opts);
  EXPECT_EQ(r.initial_holdout_loss, 0.0);
  EXPECT_EQ(r.final_holdout_loss, 0.0);
  EXPECT_EQ(r.net, setup.teacher);
}

TEST(TrainRiidlTest, DeterministicAndTeacherUntouched) {
  const SmallSetup setup;
  const std::uint64_t hash = HashParams(setup.teacher.params());
  RiidlOptions opts;
  opts.epochs = 3;
  opts.samples_per_epoch = 128;
  opts.seed = 5;
  const auto a = TrainRiidl(setup.teacher, setup.source, setup.schedule, opts);
  const auto b = TrainRiidl(setup.teacher, setup.source, setup.schedule, opts);
  EXPECT_EQ(a.net, b.net);
  EXPECT_EQ(HashParams(setup.teacher.params()), hash);
  EXPECT_EQ(a.curve.size(), 4u);
}

TEST(TrainRiidlTest, BadOptionsAndDivergence) {
  const SmallSetup setup;
  RiidlOptions opts;
  opts.batch = 0;
  EXPECT_DSRG_ERROR(TrainRiidl(setup.teacher, setup.source, setup.schedule, opts),
                    ErrorCode::kInvalidInput);
  opts = {};
  opts.epochs = 1;
  opts.samples_per_epoch = 32;
  opts.lr = std::numeric_limits<double>::infinity();
  EXPECT_DSRG_ERROR(TrainRiidl(setup.teacher, setup.source, setup.schedule, opts),
                    ErrorCode::kTrainingDiverged);
}

TEST(TrainTeacherTest, ShortRunReducesLossDeterministically) {
  const SmallSetup setup;
  TeacherDiffusionOptions opts;
  opts.epochs = 5;
  opts.samples_per_epoch = 256;
  opts.seed = 3;
  const auto a = TrainTeacherDenoiser(setup.source, setup.schedule, opts);
  const auto b = TrainTeacherDenoiser(setup.source, setup.schedule, opts);
  EXPECT_EQ(a.net, b.net);
  EXPECT_LT(a.final_holdout_loss, a.initial_holdout_loss);
}

TEST(InjectionWindowTest, HalfOpenPredicate) {
  const InjectionWindow w{0.7, 1.0};
  EXPECT_TRUE(w.Contains(80, 100));
  EXPECT_TRUE(w.Contains(100, 100));
  EXPECT_TRUE(w.Contains(71, 100));
  EXPECT_FALSE(w.Contains(70, 100));
  EXPECT_FALSE(w.Contains(50, 100));
  const InjectionWindow late{0.0, 0.3};
  int early_steps = 0, late_steps = 0;
  for (int tau = 1; tau <= 100; ++tau) {
    early_steps += w.Contains(tau, 100);
    late_steps += late.Contains(tau, 100);
    EXPECT_FALSE(w.Contains(tau, 100) && late.Contains(tau, 100));
  }
  EXPECT_EQ(early_steps, 30);
  EXPECT_EQ(late_steps, 30);
  EXPECT_DSRG_ERROR((InjectionWindow{0.5, 0.5}.Validate()), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR((InjectionWindow{-0.1, 0.5}.Validate()), ErrorCode::kInvalidInput);
  EXPECT_DSRG_ERROR((InjectionWindow{0.1, 1.5}.Validate()), ErrorCode::kInvalidInput);
}

TEST(SampleTest, DeterministicAndIdentityHookIsBitIdentical) {
  const NoiseSchedule s = NoiseSchedule::Cosine(50);
  const DenoiserNet net = RandomDenoiser(4, 3, 8, 1);
  const Vector c{0.1f, -0.2f, 0.3f};
  const Vector plain = Sample(s, net, c, 11);
  EXPECT_EQ(plain, Sample(s, net, c, 11));
  EXPECT_NE(plain, Sample(s, net, c, 12));
  const LatentHook identity = [](const Vector& v, int) { return v; };
  const InjectionWindow all{0.0, 1.0};
  EXPECT_EQ(Sample(s, net, c, 11, identity, all, HookTarget::kState), plain);
  EXPECT_EQ(Sample(s, net, c, 11, identity, all, HookTarget::kNoise), plain);
}

TEST(SampleTest, ZeroStateHookTracesByHandOnTwoSteps) {
  const NoiseSchedule s = NoiseSchedule::FromAlphaBar({0.999, 0.7, 0.2});
  const DenoiserNet net = RandomDenoiser(4, 3, 8, 2);
  const Vector c{0.5f, 0.0f, -1.0f};
  const LatentHook zero = [](const Vector& v, int) { return Vector(v.dim()); };

  // Zeroed after every step, the chain ends at zero.
  EXPECT_EQ(Sample(s, net, c, 3, zero, {0.0, 1.0}), Vector(4));

  // Zeroed after step 2 only: step 1 starts from zero and adds no noise.
  const std::vector<double> eps =
      net.Forward(std::vector<double>(4, 0.0), 0.5, c.ToDoubles());
  const double alpha = s.alpha(1);
  const double coeff = (1.0 - alpha) / std::sqrt(1.0 - s.alpha_bar(1));
  const Vector out = Sample(s, net, c, 3, zero, {0.5, 1.0});
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(out[j],
              static_cast<float>((1.0 / std::sqrt(alpha)) * (0.0 - coeff * eps[j])));
  }
}

TEST(SampleTest, ZeroNoiseHookTracesByHandOnTwoSteps) {
  const NoiseSchedule s = NoiseSchedule::FromAlphaBar({0.999, 0.7, 0.2});
  const DenoiserNet net = RandomDenoiser(4, 3, 8, 2);
  const Vector c{0.5f, 0.0f, -1.0f};
  const LatentHook zero = [](const Vector& v, int) { return Vector(v.dim()); };
  // With a zero noise prediction each step is a rescale plus fresh noise.
  Rng rng(3);
  std::vector<double> x(4), z(4);
  rng.FillNormal(x);
  rng.FillNormal(z);
  const double sigma2 = std::sqrt(s.posterior_variance(2));
  const Vector out = Sample(s, net, c, 3, zero, {0.0, 1.0}, HookTarget::kNoise);
  for (std::size_t j = 0; j < 4; ++j) {
    const float x1 = static_cast<float>(
        (1.0 / std::sqrt(s.alpha(2))) * static_cast<float>(x[j]) + sigma2 * z[j]);
    EXPECT_EQ(out[j], static_cast<float>((1.0 / std::sqrt(s.alpha(1))) * x1));
  }
}

TEST(SampleTest, Errors) {
  const NoiseSchedule s = NoiseSchedule::Cosine(5);
  const DenoiserNet net = RandomDenoiser(4, 3, 8, 1);
  EXPECT_DSRG_ERROR(Sample(s, net, Vector(2), 1), ErrorCode::kInvalidInput);
  const LatentHook shrink = [](const Vector&, int) { return Vector(2); };
  EXPECT_DSRG_ERROR(Sample(s, net, Vector(3), 1, shrink, {0.0, 1.0}),
                    ErrorCode::kInvalidInput);
}

}  // namespace
}  // namespace dsrg
