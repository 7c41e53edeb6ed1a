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

#ifndef DSRG_NN_H_
#define DSRG_NN_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsrg/random.h"

namespace dsrg {

// A named 2-D slice of a flat parameter vector. Biases use cols == 1.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

// Flat parameter storage shared by the toy networks. `T` is the storage type:
// float for deployed networks, double for the shadow copies used in gradient
// checks. Activations and gradients are always double.
template <typename T>
class ParamSet {
 public:
  std::size_t Add(std::string name, std::size_t rows, std::size_t cols) {
    blocks_.push_back({std::move(name), rows, cols, values_.size()});
    values_.resize(values_.size() + rows * cols, T{0});
    return blocks_.size() - 1;
  }

  std::span<T> block(std::size_t i) {
    return std::span<T>(values_).subspan(blocks_[i].offset, blocks_[i].size());
  }
  std::span<const T> block(std::size_t i) const {
    return std::span<const T>(values_).subspan(blocks_[i].offset, blocks_[i].size());
  }

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  template <typename U>
  ParamSet<U> Cast() const {
    ParamSet<U> out;
    for (const ParamBlock& b : blocks_) out.Add(b.name, b.rows, b.cols);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      out.values()[i] = static_cast<U>(values_[i]);
    }
    return out;
  }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<T> values_;
};

// y = W x + b with W stored row-major (out x in).
template <typename T>
void DenseForward(std::span<const T> w, std::span<const T> b, std::span<const double> x,
                  std::span<double> y) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < y.size(); ++o) {
    double acc = static_cast<double>(b[o]);
    const T* row = w.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) acc += static_cast<double>(row[i]) * x[i];
    y[o] = acc;
  }
}

// Accumulates dW += dy x^T and db += dy; writes dx = W^T dy when dx is
// non-empty.
template <typename T>
void DenseBackward(std::span<const T> w, std::span<const double> x,
                   std::span<const double> dy, std::span<double> gw, std::span<double> gb,
                   std::span<double> dx) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < dy.size(); ++o) {
    const double g = dy[o];
    gb[o] += g;
    if (g == 0.0) continue;
    double* grow = gw.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) grow[i] += g * x[i];
  }
  if (!dx.empty()) {
    for (std::size_t i = 0; i < in; ++i) dx[i] = 0.0;
    for (std::size_t o = 0; o < dy.size(); ++o) {
      const double g = dy[o];
      if (g == 0.0) continue;
      const T* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) dx[i] += static_cast<double>(row[i]) * g;
    }
  }
}

void TanhInPlace(std::span<double> v);
// dpre = dpost * (1 - post^2)
void TanhBackward(std::span<const double> post, std::span<const double> dpost,
                  std::span<double> dpre);

// Fills a block with N(0, gain^2 / fan_in).
template <typename T>
void InitGaussian(std::span<T> block, std::size_t fan_in, double gain, Rng& rng) {
  const double scale = gain / std::sqrt(static_cast<double>(fan_in));
  for (T& v : block) v = static_cast<T>(scale * rng.Normal());
}

// params -= lr * grad, rounded to the storage type.
template <typename T>
void SgdStep(ParamSet<T>& params, std::span<const double> grad, double lr) {
  std::vector<T>& values = params.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<T>(static_cast<double>(values[i]) - lr * grad[i]);
  }
}

// Adam moment buffers for one parameter set (bias-corrected updates).
class AdamState {
 public:
  AdamState(std::size_t n, double beta1 = 0.9, double beta2 = 0.999,
            double epsilon = 1e-8)
      : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  template <typename T>
  void Step(ParamSet<T>& params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    std::vector<T>& values = params.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double update = lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + epsilon_);
      values[i] = static_cast<T>(static_cast<double>(values[i]) - update);
    }
  }

 private:
  std::vector<double> m_, v_;
  double beta1_, beta2_, epsilon_;
  int t_ = 0;
};

// One row of a training curve: mean batch loss over the epoch and the loss on
// the held-out split after the epoch (epoch 0 is the untrained state).
struct LossPoint {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
};

// FNV-1a over the raw parameter bytes; used to assert teachers stay frozen.
std::uint64_t HashParams(const ParamSet<float>& params);

}  // namespace dsrg

#endif  // DSRG_NN_H_
