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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dsrg/error.h"

namespace dsrg {

// ---------------------------------------------------------------- Schedule

NoiseSchedule NoiseSchedule::Cosine(int steps, double offset, double floor) {
  if (steps < 1) Fail(ErrorCode::kInvalidInput, "schedule needs >= 1 step");
  if (!(floor > 0.0 && floor < 0.5)) {
    Fail(ErrorCode::kInvalidInput, "schedule floor must lie in (0, 0.5)");
  }
  auto f = [&](double t) {
    const double c = std::cos((t + offset) / (1.0 + offset) * std::numbers::pi / 2);
    return c * c;
  };
  const double f0 = f(0.0);
  std::vector<double> ab(static_cast<std::size_t>(steps) + 1);
  for (int tau = 0; tau <= steps; ++tau) {
    const double g = std::clamp(f(static_cast<double>(tau) / steps) / f0, 0.0, 1.0);
    ab[static_cast<std::size_t>(tau)] = floor + (1.0 - 2.0 * floor) * g;
  }
  return FromAlphaBar(std::move(ab));
}

NoiseSchedule NoiseSchedule::FromAlphaBar(std::vector<double> alpha_bar) {
  if (alpha_bar.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "schedule needs at least two entries");
  }
  for (std::size_t i = 0; i < alpha_bar.size(); ++i) {
    if (!(alpha_bar[i] > 0.0 && alpha_bar[i] < 1.0)) {
      Fail(ErrorCode::kInvalidInput, "alpha_bar must lie in (0, 1)");
    }
    if (i > 0 && !(alpha_bar[i] < alpha_bar[i - 1])) {
      Fail(ErrorCode::kInvalidInput, "alpha_bar must be strictly decreasing");
    }
  }
  NoiseSchedule s;
  s.alpha_bar_ = std::move(alpha_bar);
  return s;
}

void NoiseSchedule::CheckStep(int tau) const {
  if (tau < 0 || tau > steps()) {
    Fail(ErrorCode::kInvalidInput,
         "step " + std::to_string(tau) + " outside [0, " + std::to_string(steps()) + "]");
  }
}

double NoiseSchedule::alpha_bar(int tau) const {
  CheckStep(tau);
  return alpha_bar_[static_cast<std::size_t>(tau)];
}

double NoiseSchedule::log_snr(int tau) const {
  const double ab = alpha_bar(tau);
  return std::log(ab / (1.0 - ab));
}

double NoiseSchedule::alpha(int tau) const {
  if (tau < 1) Fail(ErrorCode::kInvalidInput, "alpha needs tau >= 1");
  return alpha_bar(tau) / alpha_bar(tau - 1);
}

double NoiseSchedule::posterior_variance(int tau) const {
  return (1.0 - alpha_bar(tau - 1)) / (1.0 - alpha_bar(tau)) * beta(tau);
}

Vector ForwardDiffuse(const NoiseSchedule& schedule, const Vector& x0, int tau,
                      const Vector& noise) {
  if (x0.dim() != noise.dim()) {
    Fail(ErrorCode::kInvalidInput, "ForwardDiffuse: noise dim mismatch");
  }
  const double ab = schedule.alpha_bar(tau);
  const double signal = std::sqrt(ab);
  const double spread = std::sqrt(1.0 - ab);
  Vector out(x0.dim());
  for (std::size_t i = 0; i < x0.dim(); ++i) {
    out[i] = static_cast<float>(signal * x0[i] + spread * noise[i]);
  }
  return out;
}

double SnrWeight(const NoiseSchedule& schedule, int tau, double gamma_cap) {
  if (!(gamma_cap > 0.0)) Fail(ErrorCode::kInvalidInput, "gamma_cap must be > 0");
  const double ab = schedule.alpha_bar(tau);
  return std::min(ab / (1.0 - ab), gamma_cap);
}

int DrawStep(const NoiseSchedule& schedule, Rng& rng) {
  const int steps = schedule.steps();
  return 1 + std::min(steps - 1, static_cast<int>(rng.Uniform() * steps));
}

void TimeEmbedding(double t, std::span<double> out) {
  for (std::size_t k = 0; k < out.size() / 2; ++k) {
    const double arg = std::numbers::pi * std::ldexp(1.0, static_cast<int>(k)) * t;
    out[2 * k] = std::sin(arg);
    out[2 * k + 1] = std::cos(arg);
  }
}

// ---------------------------------------------------------------- Network

template <typename T>
BasicDenoiserNet<T>::BasicDenoiserNet(std::size_t latent_dim, std::size_t cond_dim,
                                      std::size_t width)
    : latent_dim_(latent_dim), cond_dim_(cond_dim), width_(width) {
  const std::size_t in = latent_dim + kTimeEmbeddingDim + cond_dim;
  params_.Add("w1", width, in);
  params_.Add("b1", width, 1);
  params_.Add("w2", width, width);
  params_.Add("b2", width, 1);
  params_.Add("w3", latent_dim, width);
  params_.Add("b3", latent_dim, 1);
}

template <typename T>
void BasicDenoiserNet<T>::InitRandom(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t in = latent_dim_ + kTimeEmbeddingDim + cond_dim_;
  InitGaussian(params_.block(kW1), in, 1.0, rng);
  InitGaussian(params_.block(kW2), width_, 1.0, rng);
  InitGaussian(params_.block(kW3), width_, 1.0, rng);
  for (std::size_t b : {kB1, kB2, kB3}) {
    for (T& v : params_.block(b)) v = T{0};
  }
}

template <typename T>
std::vector<double> BasicDenoiserNet<T>::Forward(std::span<const double> x, double t,
                                                 std::span<const double> cond,
                                                 DenoiserCache* cache) const {
  if (x.size() != latent_dim_ || cond.size() != cond_dim_) {
    Fail(ErrorCode::kInvalidInput, "denoiser input dims mismatch");
  }
  DenoiserCache local;
  DenoiserCache& c = cache ? *cache : local;
  c.input.resize(latent_dim_ + kTimeEmbeddingDim + cond_dim_);
  std::copy(x.begin(), x.end(), c.input.begin());
  TimeEmbedding(t, std::span<double>(c.input).subspan(latent_dim_, kTimeEmbeddingDim));
  std::copy(
      cond.begin(), cond.end(),
      c.input.begin() + static_cast<std::ptrdiff_t>(latent_dim_ + kTimeEmbeddingDim));
  c.h1.resize(width_);
  c.h2.resize(width_);
  DenseForward<T>(params_.block(kW1), params_.block(kB1), c.input, c.h1);
  TanhInPlace(c.h1);
  DenseForward<T>(params_.block(kW2), params_.block(kB2), c.h1, c.h2);
  TanhInPlace(c.h2);
  std::vector<double> out(latent_dim_);
  DenseForward<T>(params_.block(kW3), params_.block(kB3), c.h2, out);
  return out;
}

template <typename T>
void BasicDenoiserNet<T>::Backward(const DenoiserCache& cache,
                                   std::span<const double> d_out,
                                   std::span<double> grad) const {
  const auto& blocks = params_.blocks();
  auto slice = [&](std::size_t b) {
    return grad.subspan(blocks[b].offset, blocks[b].size());
  };
  std::vector<double> dh2(width_), dpre2(width_), dh1(width_), dpre1(width_);
  DenseBackward<T>(params_.block(kW3), cache.h2, d_out, slice(kW3), slice(kB3), dh2);
  TanhBackward(cache.h2, dh2, dpre2);
  DenseBackward<T>(params_.block(kW2), cache.h1, dpre2, slice(kW2), slice(kB2), dh1);
  TanhBackward(cache.h1, dh1, dpre1);
  DenseBackward<T>(params_.block(kW1), cache.input, dpre1, slice(kW1), slice(kB1), {});
}

template class BasicDenoiserNet<float>;
template class BasicDenoiserNet<double>;

Vector PredictNoise(const DenoiserNet& net, const NoiseSchedule& schedule,
                    const Vector& x, int tau, const Vector& condition) {
  const double t = static_cast<double>(tau) / schedule.steps();
  return Vector::FromDoubles(net.Forward(x.ToDoubles(), t, condition.ToDoubles()));
}

// ---------------------------------------------------------------- Losses

template <typename T>
double KdUnetLossAndGrad(const NoiseSchedule& schedule,
                         const BasicDenoiserNet<T>& student,
                         std::span<const DiffusionItem> batch,
                         std::span<const std::vector<double>> teacher_eps,
                         double gamma_cap, std::span<double> grad) {
  if (batch.empty() || batch.size() != teacher_eps.size()) {
    Fail(ErrorCode::kInvalidInput, "KdUnetLossAndGrad: bad batch");
  }
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double steps = schedule.steps();
  DenoiserCache cache;
  std::vector<double> d_out(student.latent_dim());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const DiffusionItem& item = batch[i];
    if (teacher_eps[i].size() != student.latent_dim()) {
      Fail(ErrorCode::kInvalidInput, "teacher prediction dim mismatch");
    }
    const double w = SnrWeight(schedule, item.tau, gamma_cap);
    const std::vector<double> eps =
        student.Forward(item.x.ToDoubles(), item.tau / steps, item.condition.ToDoubles(),
                        grad.empty() ? nullptr : &cache);
    double sq = 0.0;
    for (std::size_t j = 0; j < eps.size(); ++j) {
      const double diff = teacher_eps[i][j] - eps[j];
      sq += diff * diff;
      d_out[j] = -2.0 * w * diff * inv_b;
    }
    loss += w * sq;
    if (!grad.empty()) student.Backward(cache, d_out, grad);
  }
  return loss * inv_b;
}

template double KdUnetLossAndGrad<float>(const NoiseSchedule&,
                                         const BasicDenoiserNet<float>&,
                                         std::span<const DiffusionItem>,
                                         std::span<const std::vector<double>>, double,
                                         std::span<double>);
template double KdUnetLossAndGrad<double>(const NoiseSchedule&,
                                          const BasicDenoiserNet<double>&,
                                          std::span<const DiffusionItem>,
                                          std::span<const std::vector<double>>, double,
                                          std::span<double>);

namespace {

std::vector<std::vector<double>> TeacherPredictions(
    const NoiseSchedule& schedule, const DenoiserNet& teacher,
    std::span<const DiffusionItem> items) {
  std::vector<std::vector<double>> out;
  out.reserve(items.size());
  const double steps = schedule.steps();
  for (const DiffusionItem& item : items) {
    if (item.x.dim() != teacher.latent_dim() ||
        item.condition.dim() != teacher.cond_dim()) {
      Fail(ErrorCode::kInvalidInput, "diffusion item dims mismatch");
    }
    out.push_back(teacher.Forward(item.x.ToDoubles(), item.tau / steps,
                                  item.condition.ToDoubles()));
  }
  return out;
}

}  // namespace

double KdLossUnet(const NoiseSchedule& schedule, const DenoiserNet& teacher,
                  const DenoiserNet& student, std::span<const DiffusionItem> batch,
                  double gamma_cap) {
  if (batch.empty()) Fail(ErrorCode::kInvalidInput, "KdLossUnet: empty batch");
  if (teacher.latent_dim() != student.latent_dim() ||
      teacher.cond_dim() != student.cond_dim()) {
    Fail(ErrorCode::kInvalidInput, "KdLossUnet: network shapes differ");
  }
  const auto targets = TeacherPredictions(schedule, teacher, batch);
  return KdUnetLossAndGrad<float>(schedule, student, batch, targets, gamma_cap, {});
}

// ---------------------------------------------------------------- Data

ConditionSource MakeConditionSource(const ToyWorld& world, const EncoderNet& encoder,
                                    std::vector<PromptSpec> prompts) {
  if (prompts.empty()) Fail(ErrorCode::kInvalidInput, "no prompts");
  ConditionSource source;
  source.world = &world;
  for (const auto& p : prompts) {
    source.conditions.push_back(Encode(encoder, p));
  }
  source.prompts = std::move(prompts);
  return source;
}

std::vector<DiffusionItem> DrawItems(const ConditionSource& source,
                                     const NoiseSchedule& schedule, std::size_t n,
                                     Rng& rng, std::vector<Vector>* noise) {
  if (source.world == nullptr || source.prompts.empty()) {
    Fail(ErrorCode::kInvalidInput, "condition source is empty");
  }
  const std::size_t m = source.world->latent_dim();
  std::vector<DiffusionItem> items;
  items.reserve(n);
  if (noise) noise->clear();
  std::vector<double> eps(m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = rng.Below(source.prompts.size());
    const PromptSpec& prompt = source.prompts[p];
    const auto draw = source.world->Sample(prompt.profession, prompt.attributes, rng);
    const int tau = DrawStep(schedule, rng);
    rng.FillNormal(eps);
    Vector e = Vector::FromDoubles(eps);
    items.push_back({ForwardDiffuse(schedule, Vector::FromDoubles(draw.x0), tau, e), tau,
                     source.conditions[p]});
    if (noise) noise->push_back(std::move(e));
  }
  return items;
}

// ---------------------------------------------------------------- Training

namespace {

// Mean ||target - eps||^2 with optional gradient (overwritten).
double EpsMseLossAndGrad(const NoiseSchedule& schedule, const DenoiserNet& net,
                         std::span<const DiffusionItem> batch,
                         std::span<const Vector> targets, std::span<double> grad) {
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double steps = schedule.steps();
  DenoiserCache cache;
  std::vector<double> d_out(net.latent_dim());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto eps =
        net.Forward(batch[i].x.ToDoubles(), batch[i].tau / steps,
                    batch[i].condition.ToDoubles(), grad.empty() ? nullptr : &cache);
    for (std::size_t j = 0; j < eps.size(); ++j) {
      const double diff = static_cast<double>(targets[i][j]) - eps[j];
      loss += diff * diff;
      d_out[j] = -2.0 * diff * inv_b;
    }
    if (!grad.empty()) net.Backward(cache, d_out, grad);
  }
  return loss * inv_b;
}

void CheckFinite(double loss, const char* what, int epoch) {
  if (!std::isfinite(loss)) {
    Fail(ErrorCode::kTrainingDiverged,
         std::string(what) + " loss became non-finite at epoch " + std::to_string(epoch));
  }
}

}  // namespace

DiffusionTrainResult TrainTeacherDenoiser(const ConditionSource& source,
                                          const NoiseSchedule& schedule,
                                          const TeacherDiffusionOptions& options) {
  if (options.epochs < 1 || options.batch == 0 || !(options.lr > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "bad teacher diffusion options");
  }
  const std::size_t m = source.world->latent_dim();
  const std::size_t d = source.conditions.front().dim();
  DiffusionTrainResult result;
  result.net = DenoiserNet(m, d, options.width);
  result.net.InitRandom(MixSeed(options.seed, 1));
  DenoiserNet& net = result.net;

  Rng hold_rng(MixSeed(options.seed, 2));
  std::vector<Vector> hold_noise;
  const auto hold = DrawItems(source, schedule, 512, hold_rng, &hold_noise);
  auto holdout_loss = [&] {
    return EpsMseLossAndGrad(schedule, net, hold, hold_noise, {});
  };
  result.initial_holdout_loss = holdout_loss();
  result.curve.push_back({0, result.initial_holdout_loss, result.initial_holdout_loss});

  Rng rng(MixSeed(options.seed, 3));
  std::vector<double> grad(net.params().size());
  AdamState adam(net.params().size());
  std::vector<Vector> noise;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto items =
        DrawItems(source, schedule, options.samples_per_epoch, rng, &noise);
    const double progress = static_cast<double>(epoch - 1) / options.epochs;
    const double lr = options.lr * (options.final_lr_fraction +
                                    (1.0 - options.final_lr_fraction) * 0.5 *
                                        (1.0 + std::cos(std::numbers::pi * progress)));
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < items.size(); start += options.batch) {
      const std::size_t len = std::min(options.batch, items.size() - start);
      const double loss =
          EpsMseLossAndGrad(schedule, net, std::span(items).subspan(start, len),
                            std::span<const Vector>(noise).subspan(start, len), grad);
      CheckFinite(loss, "teacher denoiser", epoch);
      adam.Step(net.params(), grad, lr);
      epoch_loss += loss;
      ++batches;
    }
    const double hl = holdout_loss();
    CheckFinite(hl, "teacher denoiser held-out", epoch);
    result.curve.push_back({epoch, epoch_loss / static_cast<double>(batches), hl});
  }
  result.final_holdout_loss = result.curve.back().holdout_loss;
  return result;
}

DiffusionTrainResult TrainRiidl(const DenoiserNet& teacher, const ConditionSource& source,
                                const NoiseSchedule& schedule,
                                const RiidlOptions& options) {
  if (options.epochs < 1 || options.batch == 0 || !(options.lr > 0.0) ||
      options.holdout_items == 0) {
    Fail(ErrorCode::kInvalidInput, "bad RIIDL options");
  }
  DiffusionTrainResult result;
  if (options.init_from_teacher) {
    result.net = teacher;
  } else {
    result.net = DenoiserNet(teacher.latent_dim(), teacher.cond_dim(), teacher.width());
    result.net.InitRandom(MixSeed(options.seed, 1));
  }
  DenoiserNet& student = result.net;

  Rng hold_rng(MixSeed(options.seed, 2));
  const auto hold = DrawItems(source, schedule, options.holdout_items, hold_rng);
  const auto hold_targets = TeacherPredictions(schedule, teacher, hold);
  auto holdout_loss = [&] {
    return KdUnetLossAndGrad<float>(schedule, student, hold, hold_targets,
                                    options.gamma_cap, {});
  };
  result.initial_holdout_loss = holdout_loss();
  result.curve.push_back({0, result.initial_holdout_loss, result.initial_holdout_loss});

  Rng rng(MixSeed(options.seed, 3));
  std::vector<double> grad(student.params().size());
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto items = DrawItems(source, schedule, options.samples_per_epoch, rng);
    const auto targets = TeacherPredictions(schedule, teacher, items);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < items.size(); start += options.batch) {
      const std::size_t len = std::min(options.batch, items.size() - start);
      const double loss = KdUnetLossAndGrad<float>(
          schedule, student, std::span(items).subspan(start, len),
          std::span(targets).subspan(start, len), options.gamma_cap, grad);
      CheckFinite(loss, "RIIDL", epoch);
      SgdStep(student.params(), grad, options.lr);
      epoch_loss += loss;
      ++batches;
    }
    const double hl = holdout_loss();
    CheckFinite(hl, "RIIDL held-out", epoch);
    result.curve.push_back({epoch, epoch_loss / static_cast<double>(batches), hl});
  }
  result.final_holdout_loss = result.curve.back().holdout_loss;
  return result;
}

// ---------------------------------------------------------------- Sampling

bool InjectionWindow::Contains(int tau, int steps) const {
  const double frac = static_cast<double>(tau) / steps;
  return frac > lo && frac <= hi;
}

namespace {

Vector CheckedHook(const LatentHook& hook, const Vector& v, int tau, std::size_t m) {
  Vector next = hook(v, tau);
  if (next.dim() != m) {
    Fail(ErrorCode::kInvalidInput, "latent hook returned dim " +
                                       std::to_string(next.dim()) + ", expected " +
                                       std::to_string(m));
  }
  return next;
}

}  // namespace

void InjectionWindow::Validate() const {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "injection window must satisfy 0 <= lo < hi <= 1");
  }
}

Vector Sample(const NoiseSchedule& schedule, const DenoiserNet& denoiser,
              const Vector& condition, std::uint64_t seed, const LatentHook& hook,
              const InjectionWindow& window, HookTarget target) {
  if (condition.dim() != denoiser.cond_dim()) {
    Fail(ErrorCode::kInvalidInput, "condition dim " + std::to_string(condition.dim()) +
                                       " != " + std::to_string(denoiser.cond_dim()));
  }
  const std::size_t m = denoiser.latent_dim();
  const int steps = schedule.steps();
  Rng rng(seed);
  std::vector<double> x(m);
  rng.FillNormal(x);
  Vector latent = Vector::FromDoubles(x);
  const std::vector<double> cond = condition.ToDoubles();
  std::vector<double> z(m);
  for (int tau = steps; tau >= 1; --tau) {
    const std::vector<double> xin = latent.ToDoubles();
    std::vector<double> eps =
        denoiser.Forward(xin, static_cast<double>(tau) / steps, cond);
    const bool hooked = hook && window.Contains(tau, steps);
    if (hooked && target == HookTarget::kNoise) {
      eps = CheckedHook(hook, Vector::FromDoubles(eps), tau, m).ToDoubles();
    }
    const double ab = schedule.alpha_bar(tau);
    const double alpha = schedule.alpha(tau);
    const double coeff = (1.0 - alpha) / std::sqrt(1.0 - ab);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    const double sigma = tau > 1 ? std::sqrt(schedule.posterior_variance(tau)) : 0.0;
    if (tau > 1) rng.FillNormal(z);
    for (std::size_t j = 0; j < m; ++j) {
      double v = inv_sqrt_alpha * (xin[j] - coeff * eps[j]);
      if (tau > 1) v += sigma * z[j];
      latent[j] = static_cast<float>(v);
    }
    if (hooked && target == HookTarget::kState) {
      latent = CheckedHook(hook, latent, tau, m);
    }
  }
  return latent;
}

}  // namespace dsrg
