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

#include "dsrg/random.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace dsrg {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.Uniform(), b.Uniform());
    EXPECT_EQ(a.Normal(), b.Normal());
  }
}

TEST(RngTest, NormalMoments) {
  Rng rng(1);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.Normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(RngTest, BelowAndCategoricalStayInRange) {
  Rng rng(2);
  std::vector<int> hits(3, 0);
  const std::vector<double> w = {1.0, 0.0, 3.0};
  for (int i = 0; i < 4000; ++i) {
    EXPECT_LT(rng.Below(7), 7u);
    ++hits[rng.Categorical(w)];
  }
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[2] / 4000.0, 0.75, 0.03);
}

TEST(RngTest, MixSeedSeparatesSalts) {
  EXPECT_NE(MixSeed(1, 1), MixSeed(1, 2));
  EXPECT_NE(MixSeed(1, 1), MixSeed(2, 1));
  EXPECT_EQ(MixSeed(9, 3), MixSeed(9, 3));
}

}  // namespace
}  // namespace dsrg
