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

#ifndef DSRG_DIFFUSION_H_
#define DSRG_DIFFUSION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dsrg/encoder.h"
#include "dsrg/linalg.h"
#include "dsrg/nn.h"
#include "dsrg/world.h"

namespace dsrg {

// Discrete-time variance schedule over steps 0..T. alpha_bar(0) is the clean
// end and alpha_bar(T) the noise end; values are strictly decreasing in (0, 1).
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  // Cosine schedule alpha_bar(t) = cos^2(((t/T + s) / (1 + s)) * pi/2),
  // normalised to 1 at t = 0 and affinely squeezed into
  // [floor, 1 - floor] so every step has a finite log-SNR.
  static NoiseSchedule Cosine(int steps, double offset = 0.008, double floor = 1e-4);
  // Throws InvalidInput unless values are strictly decreasing in (0, 1) and
  // there are at least two of them.
  static NoiseSchedule FromAlphaBar(std::vector<double> alpha_bar);

  int steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
  double alpha_bar(int tau) const;
  // lambda_tau = log(alpha_bar / (1 - alpha_bar)).
  double log_snr(int tau) const;
  // Per-step alpha_tau = alpha_bar(tau) / alpha_bar(tau - 1), tau >= 1.
  double alpha(int tau) const;
  double beta(int tau) const { return 1.0 - alpha(tau); }
  // Variance of q(x_{tau-1} | x_tau, x_0), tau >= 1.
  double posterior_variance(int tau) const;

  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

 private:
  void CheckStep(int tau) const;

  std::vector<double> alpha_bar_;
};

// sqrt(alpha_bar) * x0 + sqrt(1 - alpha_bar) * noise.
// Throws InvalidInput for tau outside [0, T] or mismatched dims.
Vector ForwardDiffuse(const NoiseSchedule& schedule, const Vector& x0, int tau,
                      const Vector& noise);

// Truncated-SNR loss weight min(exp(lambda_tau), gamma_cap).
double SnrWeight(const NoiseSchedule& schedule, int tau, double gamma_cap);

// Maps u in [0, 1) to a sampler step 1 + floor(u * T).
int DrawStep(const NoiseSchedule& schedule, Rng& rng);

inline constexpr std::size_t kTimeEmbeddingDim = 8;

// Sinusoidal embedding of t in [0, 1]: sin/cos(pi * 2^k * t), k = 0..3.
void TimeEmbedding(double t, std::span<double> out);

struct DenoiserCache {
  std::vector<double> input;
  std::vector<double> h1;
  std::vector<double> h2;
};

// Noise predictor eps(x, t, c): [x, time embedding, c] -> width -> width -> m
// with tanh hidden layers and a linear output.
template <typename T>
class BasicDenoiserNet {
 public:
  static constexpr std::size_t kW1 = 0;
  static constexpr std::size_t kB1 = 1;
  static constexpr std::size_t kW2 = 2;
  static constexpr std::size_t kB2 = 3;
  static constexpr std::size_t kW3 = 4;
  static constexpr std::size_t kB3 = 5;

  BasicDenoiserNet() = default;
  BasicDenoiserNet(std::size_t latent_dim, std::size_t cond_dim, std::size_t width = 64);

  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t cond_dim() const { return cond_dim_; }
  std::size_t width() const { return width_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  void InitRandom(std::uint64_t seed);

  template <typename U>
  BasicDenoiserNet<U> Cast() const {
    BasicDenoiserNet<U> out;
    out.latent_dim_ = latent_dim_;
    out.cond_dim_ = cond_dim_;
    out.width_ = width_;
    out.params() = params_.template Cast<U>();
    return out;
  }

  // `t` is tau / T. The cache is filled when non-null.
  std::vector<double> Forward(std::span<const double> x, double t,
                              std::span<const double> cond,
                              DenoiserCache* cache = nullptr) const;
  // Accumulates dLoss/dparams given dLoss/deps for a cached forward pass.
  void Backward(const DenoiserCache& cache, std::span<const double> d_out,
                std::span<double> grad) const;

  friend bool operator==(const BasicDenoiserNet&, const BasicDenoiserNet&) = default;

 private:
  template <typename U>
  friend class BasicDenoiserNet;

  std::size_t latent_dim_ = 0;
  std::size_t cond_dim_ = 0;
  std::size_t width_ = 0;
  ParamSet<T> params_;
};

using DenoiserNet = BasicDenoiserNet<float>;

Vector PredictNoise(const DenoiserNet& net, const NoiseSchedule& schedule,
                    const Vector& x, int tau, const Vector& condition);

// One distillation example: a noised latent, its step and its condition.
struct DiffusionItem {
  Vector x;
  int tau = 0;
  Vector condition;
};

// mean_i omega(lambda_tau_i) * ||eps_teacher_i - eps_student_i||^2.
// Throws InvalidInput for an empty batch or dimension mismatch.
double KdLossUnet(const NoiseSchedule& schedule, const DenoiserNet& teacher,
                  const DenoiserNet& student, std::span<const DiffusionItem> batch,
                  double gamma_cap);

// Same loss against precomputed teacher predictions, with optional gradient
// with respect to the student's parameters (overwritten when non-empty).
template <typename T>
double KdUnetLossAndGrad(const NoiseSchedule& schedule,
                         const BasicDenoiserNet<T>& student,
                         std::span<const DiffusionItem> batch,
                         std::span<const std::vector<double>> teacher_eps,
                         double gamma_cap, std::span<double> grad);

// Prompts with precomputed conditions; x0 samples come from the world with
// the prompt's attribute words forced.
struct ConditionSource {
  const ToyWorld* world = nullptr;
  std::vector<PromptSpec> prompts;
  std::vector<Vector> conditions;
};

ConditionSource MakeConditionSource(const ToyWorld& world, const EncoderNet& encoder,
                                    std::vector<PromptSpec> prompts);

// Draws `n` items: prompt uniformly, x0 from the world, tau via DrawStep and
// Gaussian noise. Noise targets are returned through `noise` when non-null.
std::vector<DiffusionItem> DrawItems(const ConditionSource& source,
                                     const NoiseSchedule& schedule, std::size_t n,
                                     Rng& rng, std::vector<Vector>* noise = nullptr);

struct TeacherDiffusionOptions {
  int epochs = 500;
  std::size_t samples_per_epoch = 2048;
  std::size_t batch = 64;
  // Adam step size.
  double lr = 0.001;
  // Cosine decay from lr to lr * final_lr_fraction over the run.
  double final_lr_fraction = 0.02;
  std::size_t width = 64;
  std::uint64_t seed = 0;

  friend bool operator==(const TeacherDiffusionOptions&,
                         const TeacherDiffusionOptions&) = default;
};

struct DiffusionTrainResult {
  DenoiserNet net;
  std::vector<LossPoint> curve;
  double initial_holdout_loss = 0.0;
  double final_holdout_loss = 0.0;
};

// Pre-trains the teacher by epsilon-prediction MSE on world samples.
DiffusionTrainResult TrainTeacherDenoiser(const ConditionSource& source,
                                          const NoiseSchedule& schedule,
                                          const TeacherDiffusionOptions& options);

struct RiidlOptions {
  int epochs = 100;
  std::size_t samples_per_epoch = 1024;
  std::size_t batch = 16;
  double lr = 0.01;
  std::uint64_t seed = 0;
  double gamma_cap = 5.0;
  std::size_t holdout_items = 512;
  bool init_from_teacher = false;

  friend bool operator==(const RiidlOptions&, const RiidlOptions&) = default;
};

// Distils the frozen teacher into a same-shape student by plain SGD on the
// SNR-weighted loss. Throws TrainingDiverged on a non-finite loss.
DiffusionTrainResult TrainRiidl(const DenoiserNet& teacher, const ConditionSource& source,
                                const NoiseSchedule& schedule,
                                const RiidlOptions& options);

// Fraction range (lo, hi] of tau / T inside which latent hooks fire.
struct InjectionWindow {
  double lo = 0.7;
  double hi = 1.0;

  // Half-open in noise time: lo < tau / steps <= hi.
  bool Contains(int tau, int steps) const;
  // Throws InvalidInput unless 0 <= lo < hi <= 1.
  void Validate() const;

  friend bool operator==(const InjectionWindow&, const InjectionWindow&) = default;
};

// Per-step latent transform: receives a vector at step `tau` and returns its
// replacement.
using LatentHook = std::function<Vector(const Vector& v, int tau)>;

// What a hook rewrites: the sampler state after the denoise step at tau, or
// the denoiser's noise prediction at tau before the step uses it.
enum class HookTarget { kState, kNoise };

// Ancestral DDPM sampling from tau = T down to 0 with the latent held in
// single precision between steps. The hook, when set, runs at every step
// whose tau lies in `window`. Throws InvalidInput for a wrong condition dim
// or a hook returning the wrong dim.
Vector Sample(const NoiseSchedule& schedule, const DenoiserNet& denoiser,
              const Vector& condition, std::uint64_t seed,
              const LatentHook& hook = nullptr, const InjectionWindow& window = {},
              HookTarget target = HookTarget::kState);

}  // namespace dsrg

#endif  // DSRG_DIFFUSION_H_
