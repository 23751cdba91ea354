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

#include <cmath>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

void CheckPair(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.empty() || predicted.size() != target.size()) {
    throw InvalidInputError("prediction and target must be non-empty and equally long");
  }
}

void CheckWeight(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInputError("loss weights must be > 0");
}

std::vector<double> Scaled(std::vector<double> v, double w) {
  for (double& x : v) x *= w;
  return v;
}

}  // namespace

double Mse(std::span<const double> predicted, std::span<const double> target) {
  CheckPair(predicted, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = predicted[i] - target[i];
    sum += r * r;
  }
  return sum / static_cast<double>(predicted.size());
}

std::vector<double> MseGradient(std::span<const double> predicted,
                                std::span<const double> target) {
  CheckPair(predicted, target);
  const double n = static_cast<double>(predicted.size());
  std::vector<double> out(predicted.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * (predicted[i] - target[i]) / n;
  return out;
}

double WidthLoss(std::span<const double> predicted, std::span<const double> target,
                 const LossWeights& weights) {
  CheckWeight(weights.width);
  return weights.width * Mse(predicted, target);
}

double LengthLoss(std::span<const double> predicted, std::span<const double> target,
                  const LossWeights& weights) {
  CheckWeight(weights.length);
  return weights.length * Mse(predicted, target);
}

std::vector<double> WidthLossGradient(std::span<const double> predicted,
                                      std::span<const double> target,
                                      const LossWeights& weights) {
  CheckWeight(weights.width);
  return Scaled(MseGradient(predicted, target), weights.width);
}

std::vector<double> LengthLossGradient(std::span<const double> predicted,
                                       std::span<const double> target,
                                       const LossWeights& weights) {
  CheckWeight(weights.length);
  return Scaled(MseGradient(predicted, target), weights.length);
}

double TotalLoss(const LossBreakdown& b) {
  double sum = 0.0;
  for (const double v : {b.cls, b.box, b.mask, b.keypoints, b.width, b.length}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInputError("loss components must be finite and non-negative");
    }
    sum += v;
  }
  return sum;
}

}  // namespace fiberlab
