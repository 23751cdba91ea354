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

#include "fiberlab/annotation.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <utility>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

// 8-neighbourhood in counter-clockwise order starting east. The thinning
// connectivity number relies on this order.
constexpr std::array<int, 8> kDx = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr std::array<int, 8> kDy = {0, -1, -1, -1, 0, 1, 1, 1};

bool Foreground(const RasterMask& mask, int x, int y) {
  return mask.Contains(x, y) && mask.at(x, y);
}

int NeighborCount(const RasterMask& mask, int x, int y) {
  int count = 0;
  for (int k = 0; k < 8; ++k) count += Foreground(mask, x + kDx[k], y + kDy[k]);
  return count;
}

// Yokoi's 8-connectivity number. A foreground pixel is simple exactly when
// the number is 1.
int ConnectivityNumber(const RasterMask& mask, int x, int y) {
  std::array<int, 9> off{};
  for (int k = 0; k < 8; ++k) off[k] = Foreground(mask, x + kDx[k], y + kDy[k]) ? 0 : 1;
  off[8] = off[0];
  int n = 0;
  for (int k = 0; k < 8; k += 2) {
    n += off[k] - off[k] * off[k + 1] * off[(k + 2) % 8];
  }
  return n;
}

// One-dimensional squared distance transform of a sampled function
// (Felzenszwalb and Huttenlocher).
void DistanceTransform1d(std::span<const double> f, std::span<double> d,
                         std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

std::vector<int> BreadthFirst(const std::vector<Pixel>& pixels, const std::vector<int>& index,
                              int width, int start, std::vector<int>& parent,
                              const std::vector<char>* blocked = nullptr) {
  std::vector<int> dist(pixels.size(), -1);
  parent.assign(pixels.size(), -1);
  std::deque<int> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    const Pixel p = pixels[cur];
    for (int k = 0; k < 8; ++k) {
      const int nx = p.x + kDx[k];
      const int ny = p.y + kDy[k];
      if (nx < 0 || ny < 0 || nx >= width) continue;
      const std::size_t flat = static_cast<std::size_t>(ny) * width + nx;
      if (flat >= index.size()) continue;
      const int next = index[flat];
      if (next < 0 || dist[next] >= 0 || (blocked && (*blocked)[next])) continue;
      dist[next] = dist[cur] + 1;
      parent[next] = cur;
      queue.push_back(next);
    }
  }
  return dist;
}

std::vector<Pixel> Trace(const std::vector<Pixel>& pixels, const std::vector<int>& parent,
                         int end) {
  std::vector<Pixel> path;
  for (int cur = end; cur >= 0; cur = parent[cur]) path.push_back(pixels[cur]);
  std::reverse(path.begin(), path.end());
  return path;
}

// Opens the cycle through `start`: drops it, joins its two farthest-apart
// neighbours the long way round, then puts it back at the front.
std::vector<Pixel> OpenLoop(const std::vector<Pixel>& pixels, const std::vector<int>& index,
                            const RasterMask& mask, int start, std::vector<char> blocked) {
  const int w = mask.width();
  std::vector<int> around;
  for (int k = 0; k < 8; ++k) {
    const int nx = pixels[start].x + kDx[k];
    const int ny = pixels[start].y + kDy[k];
    if (!Foreground(mask, nx, ny)) continue;
    const int n = index[static_cast<std::size_t>(ny) * w + nx];
    if (!blocked[n]) around.push_back(n);
  }
  if (around.empty()) return {pixels[start]};
  blocked[start] = 1;
  std::vector<int> parent;
  int best = -1;
  int best_from = around.front();
  int best_to = around.front();
  for (const int from : around) {
    const std::vector<int> dist = BreadthFirst(pixels, index, w, from, parent, &blocked);
    for (const int to : around) {
      if (dist[to] > best) {
        best = dist[to];
        best_from = from;
        best_to = to;
      }
    }
  }
  BreadthFirst(pixels, index, w, best_from, parent, &blocked);
  std::vector<Pixel> path = {pixels[start]};
  const std::vector<Pixel> rest = Trace(pixels, parent, best_to);
  path.insert(path.end(), rest.begin(), rest.end());
  return path;
}

}  // namespace

GrayImage MedianFilter(const GrayImage& image, int radius) {
  if (radius < 0) throw InvalidInputError("denoise radius must be >= 0");
  if (radius == 0) return image;
  const int w = image.width();
  const int h = image.height();
  GrayImage out(w, h);
  // Running histogram per row; `below` counts window values under `median`.
  const int half = (2 * radius + 1) * (2 * radius + 1) / 2;
  std::array<int, 256> hist;
  auto column = [&](int x, int y, int delta, int median, int& below) {
    const int cx = std::clamp(x, 0, w - 1);
    for (int dy = -radius; dy <= radius; ++dy) {
      const int v = image.at(cx, std::clamp(y + dy, 0, h - 1));
      hist[v] += delta;
      if (v < median) below += delta;
    }
  };
  for (int y = 0; y < h; ++y) {
    hist.fill(0);
    int median = 0;
    int below = 0;
    for (int dx = -radius; dx <= radius; ++dx) column(dx, y, 1, median, below);
    for (int x = 0; x < w; ++x) {
      if (x > 0) {
        column(x - radius - 1, y, -1, median, below);
        column(x + radius, y, 1, median, below);
      }
      while (below > half) {
        --median;
        below -= hist[median];
      }
      while (below + hist[median] <= half) {
        below += hist[median];
        ++median;
      }
      out.set(x, y, static_cast<std::uint8_t>(median));
    }
  }
  return out;
}

std::optional<int> OtsuThreshold(const GrayImage& image) {
  std::array<double, 256> hist{};
  for (std::uint8_t v : image.pixels()) hist[v] += 1.0;
  double total = 0.0;
  double total_sum = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    total_sum += i * hist[i];
  }
  std::optional<int> best;
  double best_var = -1.0;
  double w0 = 0.0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (total_sum - sum0) / w1;
    const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best = t;
    }
  }
  return best;
}

Segmentation Segment(const GrayImage& image, const SegmentOptions& options) {
  if (options.polarity == Polarity::kDark) {
    GrayImage inverted = image;
    for (std::uint8_t& v : inverted.mutable_pixels()) v = static_cast<std::uint8_t>(255 - v);
    return Segment(inverted, {options.denoise_radius, Polarity::kBright});
  }
  const GrayImage denoised = MedianFilter(image, options.denoise_radius);
  Segmentation result{RasterMask(image.width(), image.height()), OtsuThreshold(denoised), {}};
  if (!result.threshold) {
    result.warnings.push_back("constant image: empty foreground");
    return result;
  }
  const int t = *result.threshold;
  auto bits = result.mask.mutable_bits();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = denoised.pixels()[i] > t ? 1 : 0;
  return result;
}

Components LabelComponents(const RasterMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  Components out;
  out.labels.assign(static_cast<std::size_t>(w) * h, 0);
  std::vector<Pixel> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || out.labels[static_cast<std::size_t>(y) * w + x] != 0) continue;
      const int label = out.count() + 1;
      int size = 0;
      stack.push_back({x, y});
      out.labels[static_cast<std::size_t>(y) * w + x] = label;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        ++size;
        for (int k = 0; k < 8; ++k) {
          const int nx = p.x + kDx[k];
          const int ny = p.y + kDy[k];
          if (!Foreground(mask, nx, ny)) continue;
          int& l = out.labels[static_cast<std::size_t>(ny) * w + nx];
          if (l != 0) continue;
          l = label;
          stack.push_back({nx, ny});
        }
      }
      out.sizes.push_back(size);
    }
  }
  return out;
}

RasterMask LargestComponent(const RasterMask& mask) {
  const Components comps = LabelComponents(mask);
  RasterMask out(mask.width(), mask.height());
  if (comps.count() == 0) return out;
  const int best = static_cast<int>(
      std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin()) + 1;
  auto bits = out.mutable_bits();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = comps.labels[i] == best ? 1 : 0;
  return out;
}

Skeleton Skeletonize(const RasterMask& mask) {
  RasterMask work = mask;
  const int w = mask.width();
  const int h = mask.height();
  // Directions probed for background: north, south, west, east.
  constexpr std::array<std::pair<int, int>, 4> kFacing = {
      std::pair{0, -1}, std::pair{0, 1}, std::pair{-1, 0}, std::pair{1, 0}};
  std::vector<Pixel> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [fx, fy] : kFacing) {
      candidates.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (work.at(x, y) && !Foreground(work, x + fx, y + fy)) candidates.push_back({x, y});
        }
      }
      for (const Pixel& p : candidates) {
        if (NeighborCount(work, p.x, p.y) <= 1) continue;
        if (ConnectivityNumber(work, p.x, p.y) != 1) continue;
        work.set(p.x, p.y, false);
        changed = true;
      }
    }
  }
  return Skeleton{std::move(work)};
}

SkeletonPath LongestPath(const Skeleton& skeleton) {
  const RasterMask& mask = skeleton.mask;
  const Components comps = LabelComponents(mask);
  if (comps.count() == 0) throw InvalidInputError("empty skeleton");
  const int w = mask.width();
  const int label = static_cast<int>(
      std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin()) + 1;

  std::vector<Pixel> pixels;
  std::vector<int> index(comps.labels.size(), -1);
  for (std::size_t i = 0; i < comps.labels.size(); ++i) {
    if (comps.labels[i] != label) continue;
    index[i] = static_cast<int>(pixels.size());
    pixels.push_back({static_cast<int>(i % w), static_cast<int>(i / w)});
  }

  SkeletonPath result;
  result.component_pixels = static_cast<int>(pixels.size());
  std::vector<int> endpoints;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (NeighborCount(mask, pixels[i].x, pixels[i].y) == 1) endpoints.push_back(static_cast<int>(i));
  }
  result.endpoint_count = static_cast<int>(endpoints.size());

  std::vector<int> parent;
  if (pixels.size() == 1) {
    result.pixels = pixels;
  } else if (endpoints.size() >= 2) {
    int best = -1;
    int best_start = -1;
    int best_end = -1;
    for (std::size_t i = 0; i + 1 < endpoints.size(); ++i) {
      const std::vector<int> dist = BreadthFirst(pixels, index, w, endpoints[i], parent);
      for (std::size_t j = i + 1; j < endpoints.size(); ++j) {
        if (dist[endpoints[j]] > best) {
          best = dist[endpoints[j]];
          best_start = endpoints[i];
          best_end = endpoints[j];
        }
      }
    }
    BreadthFirst(pixels, index, w, best_start, parent);
    result.pixels = Trace(pixels, parent, best_end);
  } else if (endpoints.size() == 1) {
    // Walk the stem to the first junction, then go once round the loop.
    std::vector<char> stem(pixels.size(), 0);
    std::vector<Pixel> path;
    int cur = endpoints[0];
    while (true) {
      stem[cur] = 1;
      path.push_back(pixels[cur]);
      int next = -1;
      int count = 0;
      for (int k = 0; k < 8; ++k) {
        const int nx = pixels[cur].x + kDx[k];
        const int ny = pixels[cur].y + kDy[k];
        if (!Foreground(mask, nx, ny)) continue;
        const int n = index[static_cast<std::size_t>(ny) * w + nx];
        if (!stem[n]) {
          next = n;
          ++count;
        }
      }
      if (count != 1) break;
      cur = next;
    }
    stem[cur] = 0;
    path.pop_back();
    const std::vector<Pixel> loop = OpenLoop(pixels, index, mask, cur, stem);
    path.insert(path.end(), loop.begin(), loop.end());
    result.pixels = std::move(path);
    result.loop = true;
  } else {
    result.pixels = OpenLoop(pixels, index, mask, 0, std::vector<char>(pixels.size(), 0));
    result.loop = true;
  }
  return result;
}

DistanceMap::DistanceMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidInputError("distance values do not match dimensions");
  }
}

double DistanceMap::Sample(Point2D p) const {
  if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= width_ - 1 && p.y <= height_ - 1)) {
    throw InvalidInputError("keypoint outside distance map");
  }
  const int x0 = std::min(static_cast<int>(p.x), width_ - 1);
  const int y0 = std::min(static_cast<int>(p.y), height_ - 1);
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = p.x - x0;
  const double fy = p.y - y0;
  const double top = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
  const double bottom = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

DistanceMap ComputeDistanceMap(const RasterMask& mask) {
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  constexpr double kFar = 1e20;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y)) grid[static_cast<std::size_t>(y + 1) * w + x + 1] = kFar;
    }
  }
  std::vector<double> f(static_cast<std::size_t>(std::max(w, h)));
  std::vector<double> d(f.size());
  std::vector<int> v;
  std::vector<double> z;
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    DistanceTransform1d(std::span(f).first(h), std::span(d).first(h), v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y) * w, w, f.begin());
    DistanceTransform1d(std::span(f).first(w), std::span(d).first(w), v, z);
    std::copy_n(d.begin(), w, grid.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  std::vector<double> values(static_cast<std::size_t>(mask.width()) * mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      values[static_cast<std::size_t>(y) * mask.width() + x] =
          std::sqrt(grid[static_cast<std::size_t>(y + 1) * w + x + 1]);
    }
  }
  return DistanceMap(mask.width(), mask.height(), std::move(values));
}

double EstimateWidth(const DistanceMap& map, const KeypointChain& keypoints) {
  double sum = 0.0;
  for (const Point2D& p : keypoints.points()) sum += map.Sample(p);
  return 2.0 * sum / static_cast<double>(keypoints.size());
}

Annotation AnnotateFiber(const GrayImage& image, const AnnotationOptions& options) {
  if (options.keypoint_count < 2) throw InvalidInputError("keypoint count must be >= 2");
  Segmentation seg = Segment(image, options.segment);
  if (seg.mask.Empty()) throw NoFiberError("no foreground in image");

  Annotation out{Fiber{KeypointChain({{0, 0}, {1, 0}}), 0.0, 0.0}, {}};
  QualityReport& report = out.report;
  report.flags = std::move(seg.warnings);
  report.component_count = LabelComponents(seg.mask).count();
  if (report.component_count > 1) report.flags.push_back("multiple_components");

  const RasterMask fiber_mask = LargestComponent(seg.mask);
  const SkeletonPath path = LongestPath(Skeletonize(fiber_mask));
  if (path.pixels.size() < 2) throw NoFiberError("foreground too small for a fiber");

  report.skeleton_endpoint_count = path.endpoint_count;
  report.branch_count = std::max(0, path.endpoint_count - 2);
  report.path_pixel_count = static_cast<int>(path.pixels.size());
  report.discarded_skeleton_pixels = path.component_pixels - report.path_pixel_count;
  if (report.branch_count > 0) report.flags.push_back("branched_skeleton");
  if (path.loop) report.flags.push_back("loop");

  std::vector<Point2D> points;
  points.reserve(path.pixels.size());
  for (const Pixel& p : path.pixels) {
    points.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  }
  const KeypointChain keypoints =
      OrderKeypoints(ResampleKeypoints(KeypointChain(std::move(points)), options.keypoint_count));
  out.fiber.width = EstimateWidth(ComputeDistanceMap(fiber_mask), keypoints);
  out.fiber.length = SplineLength(keypoints);
  out.fiber.keypoints = keypoints;
  return out;
}

GrayImage RenderOverlay(const GrayImage& image, const Fiber& fiber) {
  GrayImage out = image;
  for (const Point2D& p : CubicSpline(fiber.keypoints).SampleDensely(kRasterSampleSpacing)) {
    const int x = static_cast<int>(std::lround(p.x));
    const int y = static_cast<int>(std::lround(p.y));
    if (x >= 0 && y >= 0 && x < out.width() && y < out.height()) out.set(x, y, 255);
  }
  return out;
}

}  // namespace fiberlab
