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

#include "dsrg/nn.h"

#include <cmath>
#include <cstring>

namespace dsrg {

void TanhInPlace(std::span<double> v) {
  for (double& x : v) x = std::tanh(x);
}

void TanhBackward(std::span<const double> post, std::span<const double> dpost,
                  std::span<double> dpre) {
  for (std::size_t i = 0; i < post.size(); ++i) {
    dpre[i] = dpost[i] * (1.0 - post[i] * post[i]);
  }
}

std::uint64_t HashParams(const ParamSet<float>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const ParamBlock& b : params.blocks()) {
    mix(b.name.data(), b.name.size());
    mix(&b.rows, sizeof(b.rows));
    mix(&b.cols, sizeof(b.cols));
  }
  mix(params.values().data(), params.values().size() * sizeof(float));
  return h;
}

}  // namespace dsrg
