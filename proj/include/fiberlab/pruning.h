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

#ifndef FIBERLAB_PRUNING_H_
#define FIBERLAB_PRUNING_H_

#include <cstddef>
#include <vector>

#include "fiberlab/geometry.h"

namespace fiberlab {

// A predicted fiber together with the mask predicted for it.
struct Detection {
  Fiber fiber;
  RasterMask mask;
  double score = 1.0;
};

struct ErrorReport {
  double length_error = 0.0;
  double mask_iou = 0.0;
};

// |1 - spline_length(keypoints) / predicted_length|. Throws
// InvalidInputError unless predicted_length > 0.
double SplineLengthError(const KeypointChain& keypoints, double predicted_length);

// |a & b| / |a | b|, or 0 when both are empty. Throws InvalidInputError
// on a size mismatch.
double MaskIou(const RasterMask& a, const RasterMask& b);

ErrorReport DetectError(const Detection& detection);

struct PruneState {
  KeypointChain keypoints;
  double mask_iou = 0.0;
  double length_error = 0.0;
  // Index into the previous state's chain of the removed keypoint. Unset
  // for the initial state.
  std::ptrdiff_t removed = -1;
};

struct PruneResult {
  // Final chain, resampled to the input keypoint count.
  KeypointChain keypoints;
  // The initial state followed by every accepted removal.
  std::vector<PruneState> trace;
  // Set when the input has fewer than three keypoints.
  bool skipped = false;
};

// Greedy keypoint removal. Keypoints at the ends of the longest segments
// are tried first; a removal is kept when it neither lowers the IoU between
// the rendered spline and the detection mask nor raises the length error,
// after which the scan starts over.
PruneResult PruneKeypoints(const Detection& detection);

}  // namespace fiberlab

#endif  // FIBERLAB_PRUNING_H_
