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

#ifndef FIBERLAB_LOSSES_H_
#define FIBERLAB_LOSSES_H_

#include <span>
#include <vector>

namespace fiberlab {

// Weights that bring the width and length terms to the magnitude of the
// other heads at the start of training.
struct LossWeights {
  double width = 1e-3;
  double length = 1e-6;
};

// Head losses computed elsewhere enter as opaque scalars.
struct LossBreakdown {
  double cls = 0.0;
  double box = 0.0;
  double mask = 0.0;
  double keypoints = 0.0;
  double width = 0.0;
  double length = 0.0;
};

// Throws InvalidInputError when lengths differ or are zero.
double Mse(std::span<const double> predicted, std::span<const double> target);
// d Mse / d predicted.
std::vector<double> MseGradient(std::span<const double> predicted,
                                std::span<const double> target);

double WidthLoss(std::span<const double> predicted, std::span<const double> target,
                 const LossWeights& weights = {});
double LengthLoss(std::span<const double> predicted, std::span<const double> target,
                  const LossWeights& weights = {});
std::vector<double> WidthLossGradient(std::span<const double> predicted,
                                      std::span<const double> target,
                                      const LossWeights& weights = {});
std::vector<double> LengthLossGradient(std::span<const double> predicted,
                                       std::span<const double> target,
                                       const LossWeights& weights = {});

// Throws InvalidInputError on a negative or non-finite component.
double TotalLoss(const LossBreakdown& b);

}  // namespace fiberlab

#endif  // FIBERLAB_LOSSES_H_
