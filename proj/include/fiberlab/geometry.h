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

#ifndef FIBERLAB_GEOMETRY_H_
#define FIBERLAB_GEOMETRY_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fiberlab {

// Number of keypoints every fiber is normalized to.
inline constexpr int kDefaultKeypointCount = 40;
// Number of point pairs sampled when comparing two splines.
inline constexpr int kDefaultSsrSamples = 200;
// Inclusive range of keypoint counts swept when selecting the optimum.
inline constexpr int kMinKeypointCount = 4;
inline constexpr int kMaxKeypointCount = 100;
inline constexpr double kDefaultKeypointPercentile = 90.0;
// Residual floor that keeps the information criterion finite for exact fits.
inline constexpr double kSsrFloor = 1e-12;
// Upper bound on the spacing of spline samples used for rasterization.
inline constexpr double kRasterSampleSpacing = 0.25;

// Image-frame point: x grows rightward, y grows downward. Pixel (c, r) has
// its center at (c, r).
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline Point2D operator+(Point2D a, Point2D b) { return {a.x + b.x, a.y + b.y}; }
inline Point2D operator-(Point2D a, Point2D b) { return {a.x - b.x, a.y - b.y}; }
inline Point2D operator*(double s, Point2D p) { return {s * p.x, s * p.y}; }

double Distance(Point2D a, Point2D b);
double SquaredDistance(Point2D a, Point2D b);

// Ordered list of at least two finite points without consecutive repeats.
class KeypointChain {
 public:
  // Throws InvalidInputError when the invariants do not hold.
  explicit KeypointChain(std::vector<Point2D> points);

  // Drops consecutive duplicates before validating. Useful for raw model
  // output, which can repeat a coordinate.
  static KeypointChain WithoutRepeats(std::vector<Point2D> points);

  std::span<const Point2D> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point2D& operator[](std::size_t i) const { return points_[i]; }
  const Point2D& front() const { return points_.front(); }
  const Point2D& back() const { return points_.back(); }

  KeypointChain Reversed() const;
  // Copy with point `index` removed. Throws if fewer than two points would
  // remain or the removal joins two identical points.
  KeypointChain Without(std::size_t index) const;

  friend bool operator==(const KeypointChain&, const KeypointChain&) = default;

 private:
  std::vector<Point2D> points_;
};

// A fiber instance: spine keypoints with a constant width and an arc length,
// both in pixels.
struct Fiber {
  KeypointChain keypoints;
  double width = 0.0;
  double length = 0.0;

  friend bool operator==(const Fiber&, const Fiber&) = default;
};

// Throws InvalidInputError unless width > 0 and length > 0.
void ValidateFiber(const Fiber& fiber);

struct SsrConfig {
  int sample_count = kDefaultSsrSamples;
};

// Row-major binary grid.
class RasterMask {
 public:
  RasterMask(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[Index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[Index(x, y)] = value ? 1 : 0; }
  bool Contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> mutable_bits() { return bits_; }

  std::size_t Count() const;
  bool Empty() const { return Count() == 0; }

  friend bool operator==(const RasterMask&, const RasterMask&) = default;

 private:
  std::size_t Index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

// Natural cubic spline through a keypoint chain. Knots are uniform in the
// curve parameter t in [0, 1]: keypoint i sits at t = i / (K - 1).
//
// Construction also tabulates cumulative arc length so that points can be
// placed at prescribed arc-length positions.
class CubicSpline {
 public:
  explicit CubicSpline(const KeypointChain& chain);

  Point2D Evaluate(double t) const;
  // First derivative with respect to t.
  Point2D Derivative(double t) const;

  double Length() const { return cumulative_.back(); }
  // Curve parameter whose arc length from t = 0 equals `arc_length`.
  double ParameterAtLength(double arc_length) const;
  Point2D PointAtLength(double arc_length) const;

  // `count` points at arc-length fractions i / (count - 1). The first and
  // last points are the chain's endpoints exactly.
  std::vector<Point2D> SampleByArcLength(int count) const;

  // Samples ordered along the curve with consecutive spacing no larger
  // than `max_spacing`.
  std::vector<Point2D> SampleDensely(double max_spacing) const;

  int segment_count() const { return static_cast<int>(knots_.size()) - 1; }

 private:
  // `u` is the knot-index parameter in [0, K - 1].
  Point2D EvaluateIndex(double u) const;
  Point2D SecondDerivativeIndex(double u) const;
  Point2D DerivativeIndex(double u) const {
    const int i = std::clamp(static_cast<int>(std::floor(u)), 0, segment_count() - 1);
    const double s = u - i;
    const auto& [c0, c1, c2] = derivative_poly_[static_cast<std::size_t>(i)];
    return {c0.x + s * (c1.x + s * c2.x), c0.y + s * (c1.y + s * c2.y)};
  }
  double Speed(double u) const {
    const Point2D d = DerivativeIndex(u);
    return std::sqrt(d.x * d.x + d.y * d.y);
  }
  double IntegrateSpeed(double a, double b) const;

  std::vector<Point2D> knots_;
  std::vector<Point2D> second_derivatives_;
  // Per-segment derivative as a quadratic in the local parameter.
  std::vector<std::array<Point2D, 3>> derivative_poly_;
  // Arc-length table over index parameter: cumulative_[j] is the arc
  // length from u = 0 to breaks_[j].
  std::vector<double> breaks_;
  std::vector<double> cumulative_;
  // Speed at each break, for the initial guess when inverting arc length.
  std::vector<double> break_speeds_;
};

// Point on the chain's spline at parameter t in [0, 1].
Point2D SplineInterpolate(const KeypointChain& chain, double t);

// Arc length of the chain's spline, converged to 1e-6 relative or better.
double SplineLength(const KeypointChain& chain);

// k points at equal arc-length spacing along the chain's spline.
KeypointChain ResampleKeypoints(const KeypointChain& chain, int k);

// True when the first point is above the last (smaller y), or level with it
// and not to its right.
bool IsCanonicallyOrdered(const KeypointChain& chain);

// Returns the chain or its reverse, whichever starts at the topmost end
// (leftmost on a tie).
KeypointChain OrderKeypoints(const KeypointChain& chain);

// Sweeps a disc of diameter `width` along the spline. A pixel is set when
// its center lies inside the swept region; the result is clipped to the
// canvas.
struct RasterOrigin {
  int x = 0;
  int y = 0;
};

// The part of a rasterized fiber inside its bounding box. Pixel (x, y) of
// `mask` is canvas pixel (origin.x + x, origin.y + y); canvas pixels outside
// the patch are background.
struct RasterPatch {
  RasterOrigin origin;
  RasterMask mask;
};

RasterPatch RasterizeFiberPatch(const KeypointChain& keypoints, double width,
                                int canvas_width, int canvas_height);

RasterMask RasterizeFiber(const KeypointChain& keypoints, double width,
                          int canvas_width, int canvas_height);
RasterMask RasterizeFiber(const Fiber& fiber, int canvas_width,
                          int canvas_height);

// Sum of squared residuals between `cfg.sample_count` arc-length-paired
// samples of the two splines.
double Ssr(const KeypointChain& approx, const KeypointChain& truth,
           const SsrConfig& cfg = {});

// Information criterion N ln(SSR / N) + k ln N with SSR floored at
// kSsrFloor.
double Bic(double ssr, int k, int sample_count);
double Bic(const KeypointChain& approx, const KeypointChain& truth, int k,
           const SsrConfig& cfg = {});

struct KeypointCountOptions {
  int min_count = kMinKeypointCount;
  int max_count = kMaxKeypointCount;
  double percentile = kDefaultKeypointPercentile;
  SsrConfig ssr;
  int threads = 1;
};

// Keypoint count in [min_count, max_count] minimizing the criterion when the
// fiber is resampled to that count. Ties go to the smaller count.
int BestKeypointCount(const KeypointChain& truth,
                      const KeypointCountOptions& options = {});

// Per-fiber optima of BestKeypointCount, in input order.
std::vector<int> BestKeypointCounts(std::span<const KeypointChain> fibers,
                                    const KeypointCountOptions& options = {});

// Nearest-rank percentile of the per-fiber optima.
int OptimalKeypointCount(std::span<const KeypointChain> fibers,
                         const KeypointCountOptions& options = {});

// Nearest-rank (ceiling) percentile of a non-empty sample.
int NearestRankPercentile(std::vector<int> values, double percentile);

}  // namespace fiberlab

#endif  // FIBERLAB_GEOMETRY_H_
