// Copyright 2026 The fiberlab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fiberlab/losses.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

using Vec = std::vector<double>;

TEST(MseTest, Examples) {
  EXPECT_EQ(Mse(Vec{1, 2, 3}, Vec{1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(Mse(Vec{1, 2}, Vec{0, 0}), 2.5);
  EXPECT_DOUBLE_EQ(Mse(Vec{3, 6}, Vec{0, 0}), 9.0 * 2.5);
}

TEST(MseTest, Errors) {
  EXPECT_THROW(Mse(Vec{}, Vec{}), InvalidInputError);
  EXPECT_THROW(Mse(Vec{1}, Vec{1, 2}), InvalidInputError);
  EXPECT_THROW(MseGradient(Vec{1}, Vec{}), InvalidInputError);
}

TEST(WeightedLossTest, DefaultsAndScaling) {
  const LossWeights w;
  EXPECT_EQ(w.width, 1e-3);
  EXPECT_EQ(w.length, 1e-6);
  // Residual sqrt(1000) gives MSE 1000.
  EXPECT_NEAR(WidthLoss(Vec{std::sqrt(1000.0)}, Vec{0}), 1.0, 1e-12);
  EXPECT_NEAR(LengthLoss(Vec{1000.0}, Vec{0}), 1.0, 1e-12);
  EXPECT_EQ(WidthLoss(Vec{4, 5}, Vec{4, 5}), 0.0);
  EXPECT_EQ(LengthLoss(Vec{4, 5}, Vec{4, 5}), 0.0);
  const Vec p{3, 1, 4}, t{1, 5, 9};
  EXPECT_DOUBLE_EQ(WidthLoss(p, t, {2e-3, 1e-6}), 2.0 * WidthLoss(p, t));
  EXPECT_DOUBLE_EQ(LengthLoss(p, t, {1e-3, 5e-6}), 5.0 * LengthLoss(p, t));
  EXPECT_THROW(WidthLoss(p, t, {0.0, 1e-6}), InvalidInputError);
  EXPECT_THROW(LengthLoss(p, t, {1e-3, -1.0}), InvalidInputError);
}

TEST(WeightedLossTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> value(0.0, 50.0);
  const LossWeights weights;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    Vec p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = value(rng);
      t[i] = value(rng);
    }
    using Loss = double (*)(std::span<const double>, std::span<const double>,
                            const LossWeights&);
    using Grad = Vec (*)(std::span<const double>, std::span<const double>, const LossWeights&);
    const std::pair<Loss, Grad> pairs[] = {{WidthLoss, WidthLossGradient},
                                           {LengthLoss, LengthLossGradient}};
    for (const auto& [loss, grad] : pairs) {
      const Vec g = grad(p, t, weights);
      for (std::size_t i = 0; i < n; ++i) {
        const double h = 1e-3 * std::max(1.0, std::abs(p[i]));
        Vec hi = p, lo = p;
        hi[i] += h;
        lo[i] -= h;
        const double fd = (loss(hi, t, weights) - loss(lo, t, weights)) / (2.0 * h);
        EXPECT_NEAR(fd, g[i], 1e-6 * std::max(std::abs(g[i]), 1e-12 * weights.length))
            << trial << " " << i;
      }
    }
  }
}

TEST(TotalLossTest, Sums) {
  EXPECT_EQ(TotalLoss({}), 0.0);
  EXPECT_EQ(TotalLoss({1, 1, 1, 1, 1, 1}), 6.0);
  EXPECT_DOUBLE_EQ(TotalLoss({0.5, 0.25, 2, 0, 1, 3}), TotalLoss({3, 1, 0, 2, 0.25, 0.5}));
  EXPECT_THROW(TotalLoss({-1, 0, 0, 0, 0, 0}), InvalidInputError);
}

}  // namespace
}  // namespace fiberlab
