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

#include "fiberlab/geometry.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fiberlab/errors.h"
#include "fiberlab/parallel.h"

namespace fiberlab {
namespace {

// Five-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {
    0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
    0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {
    0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
    0.2369268850561891, 0.2369268850561891};

constexpr double kLeafTolerance = 1e-10;
constexpr int kMaxLeafDepth = 30;

template <typename Fn>
double GaussLegendre(const Fn& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    sum += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  }
  return sum * half;
}

// Splits [a, b] until halving changes the estimate by less than the leaf
// tolerance. Leaves are appended as (right end, length) pairs.
template <typename Fn>
void CollectLeaves(const Fn& f, double a, double b, double whole, int depth,
                   std::vector<std::pair<double, double>>& leaves) {
  const double mid = 0.5 * (a + b);
  const double left = GaussLegendre(f, a, mid);
  const double right = GaussLegendre(f, mid, b);
  const double refined = left + right;
  if (depth >= kMaxLeafDepth ||
      std::abs(refined - whole) <= kLeafTolerance * refined + 1e-300) {
    leaves.emplace_back(mid, left);
    leaves.emplace_back(b, right);
    return;
  }
  CollectLeaves(f, a, mid, left, depth + 1, leaves);
  CollectLeaves(f, mid, b, right, depth + 1, leaves);
}

void SolveNaturalSecondDerivatives(std::span<const Point2D> knots,
                                   std::vector<Point2D>& m) {
  const std::size_t n = knots.size();
  m.assign(n, Point2D{});
  if (n < 3) return;
  // Tridiagonal system M[i-1] + 4 M[i] + M[i+1] = 6 (p[i+1] - 2 p[i] + p[i-1])
  // over the interior knots, with M[0] = M[n-1] = 0.
  const std::size_t interior = n - 2;
  std::vector<double> diag(interior, 4.0);
  std::vector<Point2D> rhs(interior);
  for (std::size_t i = 0; i < interior; ++i) {
    rhs[i] = 6.0 * (knots[i + 2] - 2.0 * knots[i + 1] + knots[i]);
  }
  for (std::size_t i = 1; i < interior; ++i) {
    const double w = 1.0 / diag[i - 1];
    diag[i] -= w;
    rhs[i] = rhs[i] - w * rhs[i - 1];
  }
  m[interior] = (1.0 / diag[interior - 1]) * rhs[interior - 1];
  for (std::size_t i = interior - 1; i-- > 0;) {
    m[i + 1] = (1.0 / diag[i]) * (rhs[i] - m[i + 2]);
  }
}

// Stamps the capsule into `mask`, whose pixel (0, 0) sits at canvas pixel
// `origin`. Coverage is decided in canvas coordinates.
void StampCapsuleRows(RasterMask& mask, Point2D a, Point2D b, double radius,
                      RasterOrigin origin = {}) {
  const double r2 = radius * radius;
  const int y_begin = std::max(
      origin.y, static_cast<int>(std::ceil(std::min(a.y, b.y) - radius)));
  const int y_end = std::min(origin.y + mask.height() - 1,
                             static_cast<int>(std::floor(std::max(a.y, b.y) + radius)));
  if (y_begin > y_end) return;

  const Point2D d = b - a;
  const double len = std::sqrt(d.x * d.x + d.y * d.y);
  // Only the two long sides matter: the short sides are diameters of the
  // end discs, so their crossings already lie inside the disc intervals.
  std::array<std::pair<Point2D, Point2D>, 2> sides{};
  const bool has_body = len > 0.0;
  if (has_body) {
    const Point2D n = (radius / len) * Point2D{-d.y, d.x};
    sides = {std::pair{a + n, b + n}, std::pair{b - n, a - n}};
  }

  std::span<std::uint8_t> bits = mask.mutable_bits();
  const int w = mask.width();
  for (int row = y_begin; row <= y_end; ++row) {
    const double c = row;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Point2D& center : {a, b}) {
      const double dy = c - center.y;
      if (dy * dy <= r2) {
        const double h = std::sqrt(r2 - dy * dy);
        lo = std::min(lo, center.x - h);
        hi = std::max(hi, center.x + h);
      }
    }
    if (has_body) {
      for (const auto& [p, q] : sides) {
        if ((p.y - c) * (q.y - c) > 0.0) continue;
        if (p.y == q.y) {
          lo = std::min({lo, p.x, q.x});
          hi = std::max({hi, p.x, q.x});
        } else {
          const double x = p.x + (c - p.y) * (q.x - p.x) / (q.y - p.y);
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
      }
    }
    if (!(lo <= hi)) continue;
    const int x_begin = std::max(origin.x, static_cast<int>(std::ceil(lo)));
    const int x_end = std::min(origin.x + w - 1, static_cast<int>(std::floor(hi)));
    if (x_begin > x_end) continue;
    std::uint8_t* row_bits =
        bits.data() + static_cast<std::size_t>(row - origin.y) * w - origin.x;
    std::fill(row_bits + x_begin, row_bits + x_end + 1, std::uint8_t{1});
  }
}

}  // namespace

double Distance(Point2D a, Point2D b) { return std::sqrt(SquaredDistance(a, b)); }

double SquaredDistance(Point2D a, Point2D b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

KeypointChain::KeypointChain(std::vector<Point2D> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InvalidInputError("keypoint chain needs at least 2 points, got " +
                            std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y)) {
      throw InvalidInputError("keypoint " + std::to_string(i) +
                              " is not finite");
    }
    if (i > 0 && points_[i] == points_[i - 1]) {
      throw InvalidInputError("keypoints " + std::to_string(i - 1) + " and " +
                              std::to_string(i) + " coincide");
    }
  }
}

KeypointChain KeypointChain::WithoutRepeats(std::vector<Point2D> points) {
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return KeypointChain(std::move(points));
}

KeypointChain KeypointChain::Reversed() const {
  return KeypointChain(std::vector<Point2D>(points_.rbegin(), points_.rend()));
}

KeypointChain KeypointChain::Without(std::size_t index) const {
  if (index >= points_.size()) {
    throw InvalidInputError("keypoint index out of range");
  }
  std::vector<Point2D> rest;
  rest.reserve(points_.size() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i != index) rest.push_back(points_[i]);
  }
  return KeypointChain(std::move(rest));
}

void ValidateFiber(const Fiber& fiber) {
  if (!(fiber.width > 0.0) || !std::isfinite(fiber.width)) {
    throw InvalidInputError("fiber width must be > 0");
  }
  if (!(fiber.length > 0.0) || !std::isfinite(fiber.length)) {
    throw InvalidInputError("fiber length must be > 0");
  }
}

RasterMask::RasterMask(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("mask dimensions must be positive");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t RasterMask::Count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

CubicSpline::CubicSpline(const KeypointChain& chain)
    : knots_(chain.points().begin(), chain.points().end()) {
  SolveNaturalSecondDerivatives(knots_, second_derivatives_);
  for (int i = 0; i < segment_count(); ++i) {
    const Point2D& m0 = second_derivatives_[i];
    const Point2D& m1 = second_derivatives_[i + 1];
    derivative_poly_.push_back({knots_[i + 1] - knots_[i] - (1.0 / 3.0) * m0 - (1.0 / 6.0) * m1,
                                m0, 0.5 * (m1 - m0)});
  }

  const auto speed = [this](double u) { return Speed(u); };
  std::vector<std::pair<double, double>> leaves;
  leaves.reserve(knots_.size() * 2);
  for (int i = 0; i < segment_count(); ++i) {
    const double a = i;
    const double b = i + 1;
    CollectLeaves(speed, a, b, GaussLegendre(speed, a, b), 0, leaves);
  }
  breaks_.reserve(leaves.size() + 1);
  cumulative_.reserve(leaves.size() + 1);
  breaks_.push_back(0.0);
  cumulative_.push_back(0.0);
  for (const auto& [end, length] : leaves) {
    breaks_.push_back(end);
    cumulative_.push_back(cumulative_.back() + length);
  }
  break_speeds_.reserve(breaks_.size());
  for (double u : breaks_) break_speeds_.push_back(Speed(u));
}

Point2D CubicSpline::EvaluateIndex(double u) const {
  const int last = segment_count() - 1;
  const int i = std::clamp(static_cast<int>(std::floor(u)), 0, last);
  const double s = u - i;
  const double r = 1.0 - s;
  const Point2D& p0 = knots_[i];
  const Point2D& p1 = knots_[i + 1];
  const Point2D& m0 = second_derivatives_[i];
  const Point2D& m1 = second_derivatives_[i + 1];
  const double c0 = (r * r * r - r) / 6.0;
  const double c1 = (s * s * s - s) / 6.0;
  return {r * p0.x + s * p1.x + c0 * m0.x + c1 * m1.x,
          r * p0.y + s * p1.y + c0 * m0.y + c1 * m1.y};
}

Point2D CubicSpline::SecondDerivativeIndex(double u) const {
  const int i = std::clamp(static_cast<int>(std::floor(u)), 0, segment_count() - 1);
  const double s = u - i;
  const Point2D& m0 = second_derivatives_[i];
  const Point2D& m1 = second_derivatives_[i + 1];
  return {(1.0 - s) * m0.x + s * m1.x, (1.0 - s) * m0.y + s * m1.y};
}

double CubicSpline::IntegrateSpeed(double a, double b) const {
  return GaussLegendre([this](double u) { return Speed(u); }, a, b);
}

Point2D CubicSpline::Evaluate(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidInputError("spline parameter must lie in [0, 1]");
  }
  if (t == 1.0) return knots_.back();
  return EvaluateIndex(t * segment_count());
}

Point2D CubicSpline::Derivative(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidInputError("spline parameter must lie in [0, 1]");
  }
  return static_cast<double>(segment_count()) * DerivativeIndex(t * segment_count());
}

double CubicSpline::ParameterAtLength(double arc_length) const {
  const double total = Length();
  if (arc_length <= 0.0) return 0.0;
  if (arc_length >= total) return 1.0;

  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), arc_length);
  const std::size_t j = std::min<std::size_t>(
      static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1,
      breaks_.size() - 2);
  const double a = breaks_[j];
  const double b = breaks_[j + 1];
  const double target = arc_length - cumulative_[j];
  const double leaf = cumulative_[j + 1] - cumulative_[j];

  double lo = a;
  double hi = b;
  // Inverts the quadratic through the end speeds; exact for linear speed.
  double u = a;
  if (leaf > 0.0) {
    const double v0 = break_speeds_[j];
    const double dv = (break_speeds_[j + 1] - v0) / (b - a);
    const double disc = v0 * v0 + 2.0 * dv * target;
    const double step = disc > 0.0 && v0 + std::sqrt(disc) > 0.0
                            ? 2.0 * target / (v0 + std::sqrt(disc))
                            : (b - a) * (target / leaf);
    u = std::clamp(a + step, a, b);
  }
  const double tolerance = 1e-13 * std::max(1.0, total);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = IntegrateSpeed(a, u) - target;
    if (std::abs(f) <= tolerance) break;
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const Point2D d1 = DerivativeIndex(u);
    const double speed = std::sqrt(d1.x * d1.x + d1.y * d1.y);
    double next = speed > 0.0 ? u - f / speed : 0.5 * (lo + hi);
    if (next > lo && next < hi) {
      // The Newton residual is s''/2 * step^2 to leading order; skip the
      // confirming quadrature when that is far below the tolerance.
      const Point2D d2 = SecondDerivativeIndex(u);
      const double accel = (d1.x * d2.x + d1.y * d2.y) / speed;
      const double step = next - u;
      if (0.5 * std::abs(accel) * step * step <= 1e-3 * tolerance) {
        u = next;
        break;
      }
    } else {
      next = 0.5 * (lo + hi);
    }
    if (next == u) break;
    u = next;
  }
  return u / segment_count();
}

Point2D CubicSpline::PointAtLength(double arc_length) const {
  const double t = ParameterAtLength(arc_length);
  if (t >= 1.0) return knots_.back();
  return EvaluateIndex(t * segment_count());
}

std::vector<Point2D> CubicSpline::SampleByArcLength(int count) const {
  if (count < 2) throw InvalidInputError("need at least 2 samples");
  std::vector<Point2D> samples;
  samples.reserve(static_cast<std::size_t>(count));
  const double total = Length();
  samples.push_back(knots_.front());
  for (int i = 1; i < count - 1; ++i) {
    samples.push_back(PointAtLength(total * i / (count - 1)));
  }
  samples.push_back(knots_.back());
  return samples;
}

std::vector<Point2D> CubicSpline::SampleDensely(double max_spacing) const {
  if (!(max_spacing > 0.0)) throw InvalidInputError("spacing must be positive");
  const double max_sq = max_spacing * max_spacing;
  std::vector<Point2D> samples;
  samples.push_back(knots_.front());

  // Emits the open-closed run (u0, u1], subdividing wherever neighbouring
  // samples would be too far apart.
  std::vector<std::pair<double, Point2D>> stack;
  auto emit = [&](double u0, Point2D p0, double u1, Point2D p1) {
    stack.clear();
    stack.emplace_back(u1, p1);
    double cu = u0;
    Point2D cp = p0;
    while (!stack.empty()) {
      const auto [nu, np] = stack.back();
      if (SquaredDistance(cp, np) > max_sq && nu - cu > 1e-12) {
        const double mu = 0.5 * (cu + nu);
        stack.emplace_back(mu, EvaluateIndex(mu));
        continue;
      }
      samples.push_back(np);
      stack.pop_back();
      cu = nu;
      cp = np;
    }
  };

  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
    const double a = breaks_[j];
    const double b = breaks_[j + 1];
    const double leaf = cumulative_[j + 1] - cumulative_[j];
    const int steps = std::max(1, static_cast<int>(std::ceil(leaf / (0.8 * max_spacing))));
    double prev_u = a;
    Point2D prev_p = samples.back();
    for (int s = 1; s <= steps; ++s) {
      const double u = s == steps ? b : a + (b - a) * s / steps;
      const Point2D p = (j + 2 == breaks_.size() && s == steps) ? knots_.back()
                                                              : EvaluateIndex(u);
      emit(prev_u, prev_p, u, p);
      prev_u = u;
      prev_p = p;
    }
  }
  return samples;
}

Point2D SplineInterpolate(const KeypointChain& chain, double t) {
  return CubicSpline(chain).Evaluate(t);
}

double SplineLength(const KeypointChain& chain) { return CubicSpline(chain).Length(); }

KeypointChain ResampleKeypoints(const KeypointChain& chain, int k) {
  if (k < 2) throw InvalidInputError("resampling needs k >= 2");
  return KeypointChain(CubicSpline(chain).SampleByArcLength(k));
}

bool IsCanonicallyOrdered(const KeypointChain& chain) {
  const Point2D& first = chain.front();
  const Point2D& last = chain.back();
  return first.y < last.y || (first.y == last.y && first.x <= last.x);
}

KeypointChain OrderKeypoints(const KeypointChain& chain) {
  return IsCanonicallyOrdered(chain) ? chain : chain.Reversed();
}

RasterPatch RasterizeFiberPatch(const KeypointChain& keypoints, double width,
                                int canvas_width, int canvas_height) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidInputError("fiber width must be > 0");
  }
  if (canvas_width <= 0 || canvas_height <= 0) {
    throw InvalidInputError("mask dimensions must be positive");
  }
  const double radius = 0.5 * width;
  const std::vector<Point2D> samples =
      CubicSpline(keypoints).SampleDensely(kRasterSampleSpacing);
  double min_x = samples.front().x;
  double max_x = min_x;
  double min_y = samples.front().y;
  double max_y = min_y;
  for (const Point2D& p : samples) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  auto clamp_to = [](double v, int limit) {
    return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(limit)));
  };
  const int x0 = clamp_to(std::floor(min_x - radius), canvas_width - 1);
  const int y0 = clamp_to(std::floor(min_y - radius), canvas_height - 1);
  const int x1 = clamp_to(std::ceil(max_x + radius) + 1.0, canvas_width);
  const int y1 = clamp_to(std::ceil(max_y + radius) + 1.0, canvas_height);
  // A fiber entirely off the canvas still gets a (blank) 1x1 patch.
  RasterPatch patch{{x0, y0}, RasterMask(std::max(1, x1 - x0), std::max(1, y1 - y0))};
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    StampCapsuleRows(patch.mask, samples[i], samples[i + 1], radius, patch.origin);
  }
  return patch;
}

RasterMask RasterizeFiber(const KeypointChain& keypoints, double width,
                          int canvas_width, int canvas_height) {
  const RasterPatch patch = RasterizeFiberPatch(keypoints, width, canvas_width, canvas_height);
  RasterMask mask(canvas_width, canvas_height);
  auto bits = mask.mutable_bits();
  const auto src = patch.mask.bits();
  for (int y = 0; y < patch.mask.height(); ++y) {
    std::copy_n(src.data() + static_cast<std::size_t>(y) * patch.mask.width(),
                patch.mask.width(),
                bits.data() + static_cast<std::size_t>(y + patch.origin.y) * canvas_width +
                    patch.origin.x);
  }
  return mask;
}

RasterMask RasterizeFiber(const Fiber& fiber, int canvas_width, int canvas_height) {
  return RasterizeFiber(fiber.keypoints, fiber.width, canvas_width, canvas_height);
}

double Ssr(const KeypointChain& approx, const KeypointChain& truth,
           const SsrConfig& cfg) {
  if (cfg.sample_count < 2) throw InvalidInputError("SSR needs N >= 2");
  const std::vector<Point2D> a = CubicSpline(approx).SampleByArcLength(cfg.sample_count);
  const std::vector<Point2D> t = CubicSpline(truth).SampleByArcLength(cfg.sample_count);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += SquaredDistance(a[i], t[i]);
  return sum;
}

double Bic(double ssr, int k, int sample_count) {
  const double n = sample_count;
  const double clamped = ssr < kSsrFloor ? kSsrFloor : ssr;
  return n * std::log(clamped / n) + k * std::log(n);
}

double Bic(const KeypointChain& approx, const KeypointChain& truth, int k,
           const SsrConfig& cfg) {
  if (k < 2) throw InvalidInputError("keypoint count must be >= 2");
  return Bic(Ssr(approx, truth, cfg), k, cfg.sample_count);
}

int BestKeypointCount(const KeypointChain& truth, const KeypointCountOptions& options) {
  if (options.min_count < 2 || options.max_count < options.min_count) {
    throw InvalidInputError("invalid keypoint count range");
  }
  const int n = options.ssr.sample_count;
  if (n < 2) throw InvalidInputError("SSR needs N >= 2");
  const CubicSpline truth_spline(truth);
  const std::vector<Point2D> truth_samples = truth_spline.SampleByArcLength(n);

  int best_k = options.min_count;
  double best = std::numeric_limits<double>::infinity();
  for (int k = options.min_count; k <= options.max_count; ++k) {
    const CubicSpline approx(KeypointChain(truth_spline.SampleByArcLength(k)));
    const std::vector<Point2D> samples = approx.SampleByArcLength(n);
    double ssr = 0.0;
    for (int i = 0; i < n; ++i) ssr += SquaredDistance(samples[i], truth_samples[i]);
    const double score = Bic(ssr, k, n);
    if (score < best) {
      best = score;
      best_k = k;
    }
  }
  return best_k;
}

std::vector<int> BestKeypointCounts(std::span<const KeypointChain> fibers,
                                    const KeypointCountOptions& options) {
  std::vector<int> best(fibers.size());
  ParallelFor(fibers.size(), options.threads,
              [&](std::size_t i) { best[i] = BestKeypointCount(fibers[i], options); });
  return best;
}

int NearestRankPercentile(std::vector<int> values, double percentile) {
  if (values.empty()) throw InvalidInputError("percentile of empty sample");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw InvalidInputError("percentile must lie in (0, 100]");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // Small slack keeps exact products such as 0.9 * 10 from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

int OptimalKeypointCount(std::span<const KeypointChain> fibers,
                         const KeypointCountOptions& options) {
  if (fibers.empty()) throw InvalidInputError("no fibers given");
  return NearestRankPercentile(BestKeypointCounts(fibers, options), options.percentile);
}

}  // namespace fiberlab
