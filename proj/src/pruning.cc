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

#include "fiberlab/pruning.h"

#include <algorithm>
#include <numeric>
#include <optional>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

struct Segment {
  std::size_t first;
  double length;
};

// Segments (i, i + 1) by descending length; equal lengths keep index order.
std::vector<Segment> SegmentsByLength(const KeypointChain& chain) {
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    segments.push_back({i, Distance(chain[i], chain[i + 1])});
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& a, const Segment& b) { return a.length > b.length; });
  return segments;
}

std::optional<KeypointChain> TryRemove(const KeypointChain& chain, std::size_t index) {
  if (chain.size() <= 2) return std::nullopt;
  if (index > 0 && index + 1 < chain.size() && chain[index - 1] == chain[index + 1]) {
    return std::nullopt;
  }
  return chain.Without(index);
}

// IoU against a fixed full-canvas mask, computed over the candidate's
// patch only. Equal to MaskIou(RasterizeFiber(...), mask).
class PatchIou {
 public:
  explicit PatchIou(const RasterMask& mask) : mask_(mask), mask_count_(mask.Count()) {}

  double operator()(const KeypointChain& chain, double width) const {
    const RasterPatch patch = RasterizeFiberPatch(chain, width, mask_.width(), mask_.height());
    std::size_t inter = 0;
    std::size_t count = 0;
    const auto bits = patch.mask.bits();
    const int pw = patch.mask.width();
    for (int y = 0; y < patch.mask.height(); ++y) {
      const std::uint8_t* row = bits.data() + static_cast<std::size_t>(y) * pw;
      for (int x = 0; x < pw; ++x) {
        count += row[x];
        inter += row[x] & mask_.at(patch.origin.x + x, patch.origin.y + y);
      }
    }
    const std::size_t uni = count + mask_count_ - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }

 private:
  const RasterMask& mask_;
  std::size_t mask_count_;
};

}  // namespace

double SplineLengthError(const KeypointChain& keypoints, double predicted_length) {
  if (!(predicted_length > 0.0)) throw InvalidInputError("predicted length must be positive");
  return std::abs(1.0 - SplineLength(keypoints) / predicted_length);
}

double MaskIou(const RasterMask& a, const RasterMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw InvalidInputError("mask dimensions differ");
  }
  const auto x = a.bits();
  const auto y = b.bits();
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] & y[i];
    uni += x[i] | y[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

ErrorReport DetectError(const Detection& detection) {
  ValidateFiber(detection.fiber);
  const RasterMask rendered = RasterizeFiber(detection.fiber, detection.mask.width(),
                                             detection.mask.height());
  return {SplineLengthError(detection.fiber.keypoints, detection.fiber.length),
          MaskIou(rendered, detection.mask)};
}

PruneResult PruneKeypoints(const Detection& detection) {
  const KeypointChain& input = detection.fiber.keypoints;
  const int count = static_cast<int>(input.size());
  const ErrorReport initial = DetectError(detection);
  PruneResult result{input, {PruneState{input, initial.mask_iou, initial.length_error, -1}}, false};
  if (count < 3) {
    result.skipped = true;
    return result;
  }
  const PatchIou patch_iou(detection.mask);
  const double width = detection.fiber.width;
  const double length = detection.fiber.length;

  struct Outcome {
    bool valid = false;
    double iou = 0.0;
    double error = 0.0;
  };
  KeypointChain current = input;
  double iou = initial.mask_iou;
  double error = initial.length_error;
  // Every acceptance drops one keypoint, so count - 2 restarts is the most
  // that can happen; the cap only guards that invariant.
  for (int restart = 0; restart < count; ++restart) {
    // Interior keypoints belong to two segments; within one scan the chain
    // is fixed, so the second visit reuses the first result.
    std::vector<std::optional<Outcome>> seen(current.size());
    bool accepted = false;
    for (const Segment& segment : SegmentsByLength(current)) {
      for (const std::size_t index : {segment.first, segment.first + 1}) {
        if (!seen[index]) {
          Outcome outcome;
          if (const std::optional<KeypointChain> candidate = TryRemove(current, index)) {
            outcome = {true, patch_iou(*candidate, width), SplineLengthError(*candidate, length)};
          }
          seen[index] = outcome;
        }
        const Outcome& o = *seen[index];
        if (!o.valid || !(o.iou >= iou && o.error <= error)) continue;
        current = current.Without(index);
        iou = o.iou;
        error = o.error;
        result.trace.push_back({current, iou, error, static_cast<std::ptrdiff_t>(index)});
        accepted = true;
        break;
      }
      if (accepted) break;
    }
    if (!accepted) break;
  }
  result.keypoints = ResampleKeypoints(current, count);
  return result;
}

}  // namespace fiberlab
