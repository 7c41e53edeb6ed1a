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

#ifndef DSRG_RANDOM_H_
#define DSRG_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dsrg {

// Seeded generator whose uniform and normal draws are defined here rather
// than by the standard library's distributions, so that a seed produces the
// same stream under every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n);

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

  void FillNormal(std::span<double> out, double scale = 1.0);

  // Index drawn from an (unnormalised) categorical distribution.
  std::size_t Categorical(std::span<const double> weights);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a salt.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt);

}  // namespace dsrg

#endif  // DSRG_RANDOM_H_
