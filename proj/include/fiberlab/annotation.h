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

// Semiautomatic fiber annotation: segmentation, thinning, longest skeleton
// path, distance-map width estimate and spline length.

#ifndef FIBERLAB_ANNOTATION_H_
#define FIBERLAB_ANNOTATION_H_

#include <optional>
#include <string>
#include <vector>

#include "fiberlab/geometry.h"
#include "fiberlab/image.h"

namespace fiberlab {

enum class Polarity { kBright, kDark };

struct SegmentOptions {
  // Median window is (2 * radius + 1) squared; 0 disables denoising.
  int denoise_radius = 1;
  Polarity polarity = Polarity::kBright;
};

struct Segmentation {
  RasterMask mask;
  // Foreground is intensity > threshold (after polarity); empty when the
  // image has a single intensity.
  std::optional<int> threshold;
  std::vector<std::string> warnings;
};

GrayImage MedianFilter(const GrayImage& image, int radius);

// Otsu's global threshold; nullopt for a constant image.
std::optional<int> OtsuThreshold(const GrayImage& image);

Segmentation Segment(const GrayImage& image, const SegmentOptions& options = {});

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// 8-connected component labelling. Labels are 1-based in raster order of
// first appearance; 0 marks background.
struct Components {
  std::vector<int> labels;
  std::vector<int> sizes;  // sizes[label - 1]
  int count() const { return static_cast<int>(sizes.size()); }
};
Components LabelComponents(const RasterMask& mask);

// Mask of the largest component (first in raster order on ties).
RasterMask LargestComponent(const RasterMask& mask);

// One-pixel-thick result of thinning a mask.
struct Skeleton {
  RasterMask mask;
};

// Iterative directional thinning. Each sub-iteration selects border pixels
// facing one direction and deletes those that are simple (their removal
// keeps 8-connectivity of the foreground and 4-connectivity of the
// background) and not line ends. Runs until nothing changes.
Skeleton Skeletonize(const RasterMask& mask);

struct SkeletonPath {
  std::vector<Pixel> pixels;  // consecutive pixels are 8-adjacent
  int endpoint_count = 0;     // degree-1 pixels in the searched component
  int component_pixels = 0;
  bool loop = false;          // the component had fewer than two ends
};

// Longest endpoint-to-endpoint path (in hops) of the skeleton's largest
// component. Pure cycles are opened next to their first raster pixel.
SkeletonPath LongestPath(const Skeleton& skeleton);

class DistanceMap {
 public:
  DistanceMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  // Bilinear lookup; throws when the point is outside the map.
  double Sample(Point2D p) const;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

// Exact Euclidean distance of every pixel to the nearest false pixel. The
// frame just outside the image counts as false.
DistanceMap ComputeDistanceMap(const RasterMask& mask);

// Twice the mean distance sampled at the keypoints.
double EstimateWidth(const DistanceMap& map, const KeypointChain& keypoints);

struct AnnotationOptions {
  SegmentOptions segment;
  int keypoint_count = kDefaultKeypointCount;
};

// Diagnostics a reviewer uses to discard faulty annotations.
struct QualityReport {
  int component_count = 0;
  int skeleton_endpoint_count = 0;
  int branch_count = 0;  // skeleton ends beyond the two of a plain path
  int discarded_skeleton_pixels = 0;
  int path_pixel_count = 0;
  std::vector<std::string> flags;
};

struct Annotation {
  Fiber fiber;
  QualityReport report;
};

// Throws NoFiberError when the image has no usable foreground.
Annotation AnnotateFiber(const GrayImage& image, const AnnotationOptions& options = {});

// Source image with the fiber's spline drawn as a 1-px bright line.
GrayImage RenderOverlay(const GrayImage& image, const Fiber& fiber);

}  // namespace fiberlab

#endif  // FIBERLAB_ANNOTATION_H_
