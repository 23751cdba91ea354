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
#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

// Bimodal image: background ~ N(40, 5), fiber ~ N(200, 5).
GrayImage Bimodal(const RasterMask& truth, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> bg(40.0, 5.0);
  std::normal_distribution<double> fg(200.0, 5.0);
  GrayImage image(truth.width(), truth.height());
  for (int y = 0; y < truth.height(); ++y) {
    for (int x = 0; x < truth.width(); ++x) {
      const double v = truth.at(x, y) ? fg(rng) : bg(rng);
      image.set(x, y, static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)));
    }
  }
  return image;
}

double Agreement(const RasterMask& a, const RasterMask& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) same += a.bits()[i] == b.bits()[i];
  return static_cast<double>(same) / a.bits().size();
}

RasterMask FromRows(const std::vector<std::string>& rows) {
  RasterMask mask(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) mask.set(x, y, rows[y][x] == '#');
  }
  return mask;
}

bool HasFullTwoByTwo(const RasterMask& m) {
  for (int y = 0; y + 1 < m.height(); ++y) {
    for (int x = 0; x + 1 < m.width(); ++x) {
      if (m.at(x, y) && m.at(x + 1, y) && m.at(x, y + 1) && m.at(x + 1, y + 1)) return true;
    }
  }
  return false;
}

bool SubsetOf(const RasterMask& a, const RasterMask& b) {
  for (std::size_t i = 0; i < a.bits().size(); ++i) {
    if (a.bits()[i] && !b.bits()[i]) return false;
  }
  return true;
}

TEST(SegmentTest, BimodalImageRecoversMask) {
  const RasterMask truth = RasterizeFiber(KeypointChain({{20, 30}, {60, 50}, {110, 40}}), 9.0, 128, 80);
  const Segmentation seg = Segment(Bimodal(truth, 3));
  EXPECT_GE(Agreement(seg.mask, truth), 0.99);
  EXPECT_TRUE(seg.warnings.empty());
}

TEST(SegmentTest, AllZeroImageIsEmptyWithWarning) {
  const Segmentation seg = Segment(GrayImage(32, 16, 0));
  EXPECT_TRUE(seg.mask.Empty());
  EXPECT_FALSE(seg.threshold.has_value());
  EXPECT_EQ(seg.warnings.size(), 1u);
}

TEST(SegmentTest, DarkPolarityOnInvertedImageMatchesBright) {
  const RasterMask truth = RasterizeFiber(KeypointChain({{10, 10}, {70, 45}}), 7.0, 80, 60);
  const GrayImage image = Bimodal(truth, 5);
  GrayImage inverted = image;
  for (auto& v : inverted.mutable_pixels()) v = static_cast<std::uint8_t>(255 - v);
  EXPECT_EQ(Segment(inverted, {1, Polarity::kDark}).mask, Segment(image).mask);
}

TEST(SegmentTest, MedianRemovesSaltNoise) {
  GrayImage image(9, 9, 10);
  image.set(4, 4, 250);
  EXPECT_EQ(MedianFilter(image, 1).at(4, 4), 10);
  EXPECT_EQ(MedianFilter(image, 0), image);
}

TEST(SegmentTest, MedianMatchesSortedWindows) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> value(0, 255);
  GrayImage image(19, 13);
  for (auto& v : image.mutable_pixels()) v = static_cast<std::uint8_t>(value(rng));
  for (int radius = 1; radius <= 3; ++radius) {
    const GrayImage filtered = MedianFilter(image, radius);
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        std::vector<int> window;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            window.push_back(image.at(std::clamp(x + dx, 0, image.width() - 1),
                                      std::clamp(y + dy, 0, image.height() - 1)));
          }
        }
        std::sort(window.begin(), window.end());
        EXPECT_EQ(filtered.at(x, y), window[window.size() / 2]);
      }
    }
  }
}

TEST(SkeletonizeTest, ThinLineUnchanged) {
  RasterMask line(40, 5);
  for (int x = 3; x < 37; ++x) line.set(x, 2);
  EXPECT_EQ(Skeletonize(line).mask, line);
}

TEST(SkeletonizeTest, RectangleBecomesCenterline) {
  RasterMask rect(60, 21);
  for (int y = 5; y < 16; ++y) {
    for (int x = 5; x < 55; ++x) rect.set(x, y);
  }
  const RasterMask skel = Skeletonize(rect).mask;
  EXPECT_FALSE(HasFullTwoByTwo(skel));
  EXPECT_TRUE(SubsetOf(skel, rect));
  EXPECT_EQ(LabelComponents(skel).count(), 1);
  int min_x = 1000;
  int max_x = -1;
  for (int y = 0; y < skel.height(); ++y) {
    for (int x = 0; x < skel.width(); ++x) {
      if (!skel.at(x, y)) continue;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
    }
  }
  EXPECT_GE(max_x - min_x + 1, 40);
  // Every pixel of the centerline is needed: each is an end or non-simple.
  const Skeleton again = Skeletonize(skel);
  EXPECT_EQ(again.mask, skel);
}

TEST(SkeletonizeTest, EmptyMask) {
  EXPECT_TRUE(Skeletonize(RasterMask(10, 10)).mask.Empty());
}

TEST(SkeletonizeTest, PropertiesOnRandomFiberMasks) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coord(5.0, 95.0);
  std::uniform_real_distribution<double> width(2.0, 12.0);
  for (int trial = 0; trial < 60; ++trial) {
    RasterMask mask(100, 100);
    const int fibers = 1 + trial % 3;
    for (int f = 0; f < fibers; ++f) {
      const RasterMask one = RasterizeFiber(
          KeypointChain({{coord(rng), coord(rng)}, {coord(rng), coord(rng)}, {coord(rng), coord(rng)}}),
          width(rng), 100, 100);
      for (std::size_t i = 0; i < one.bits().size(); ++i) mask.mutable_bits()[i] |= one.bits()[i];
    }
    const RasterMask skel = Skeletonize(mask).mask;
    EXPECT_TRUE(SubsetOf(skel, mask));
    EXPECT_EQ(LabelComponents(skel).count(), LabelComponents(mask).count());
    EXPECT_EQ(Skeletonize(skel).mask, skel);
  }
}

TEST(LongestPathTest, StraightLine) {
  RasterMask line(120, 5);
  for (int x = 10; x < 110; ++x) line.set(x, 2);
  const SkeletonPath path = LongestPath(Skeleton{line});
  ASSERT_EQ(path.pixels.size(), 100u);
  const bool forward = path.pixels.front() == Pixel{10, 2} && path.pixels.back() == Pixel{109, 2};
  const bool backward = path.pixels.front() == Pixel{109, 2} && path.pixels.back() == Pixel{10, 2};
  EXPECT_TRUE(forward || backward);
  EXPECT_FALSE(path.loop);
}

// Exhaustive all-pairs BFS over endpoints; returns the longest hop count + 1.
int BruteForceLongest(const RasterMask& m) {
  std::vector<Pixel> ends;
  auto fg = [&](int x, int y) { return m.Contains(x, y) && m.at(x, y); };
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!fg(x, y)) continue;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) n += (dx || dy) && fg(x + dx, y + dy);
      }
      if (n == 1) ends.push_back({x, y});
    }
  }
  int best = 0;
  for (const Pixel& s : ends) {
    std::vector<int> dist(m.bits().size(), -1);
    std::deque<Pixel> q{s};
    dist[s.y * m.width() + s.x] = 0;
    while (!q.empty()) {
      const Pixel p = q.front();
      q.pop_front();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!(dx || dy) || !fg(p.x + dx, p.y + dy)) continue;
          int& d = dist[(p.y + dy) * m.width() + p.x + dx];
          if (d >= 0) continue;
          d = dist[p.y * m.width() + p.x] + 1;
          q.push_back({p.x + dx, p.y + dy});
        }
      }
    }
    for (const Pixel& e : ends) best = std::max(best, dist[e.y * m.width() + e.x] + 1);
  }
  return best;
}

void ExpectSimpleAdjacentPath(const SkeletonPath& path) {
  for (std::size_t i = 1; i < path.pixels.size(); ++i) {
    EXPECT_LE(std::abs(path.pixels[i].x - path.pixels[i - 1].x), 1);
    EXPECT_LE(std::abs(path.pixels[i].y - path.pixels[i - 1].y), 1);
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(path.pixels[i] == path.pixels[j]);
  }
}

TEST(LongestPathTest, YShapeDropsShortArm) {
  RasterMask y(200, 130);
  y.set(100, 100);
  for (int i = 1; i <= 50; ++i) y.set(100 - i, 100);
  for (int i = 1; i <= 40; ++i) y.set(100 + i, 100);
  for (int i = 1; i <= 10; ++i) y.set(100, 100 + i);
  const SkeletonPath path = LongestPath(Skeleton{y});
  EXPECT_EQ(path.pixels.size(), 91u);
  EXPECT_EQ(static_cast<int>(path.pixels.size()), BruteForceLongest(y));
  EXPECT_EQ(path.endpoint_count, 3);
  ExpectSimpleAdjacentPath(path);
  for (const Pixel& p : path.pixels) EXPECT_EQ(p.y, 100);
}

TEST(LongestPathTest, LShape) {
  const RasterMask l = FromRows({
      "..........",
      ".#........",
      ".#........",
      ".#........",
      "..######..",
      "..........",
  });
  const SkeletonPath path = LongestPath(Skeleton{l});
  EXPECT_EQ(path.pixels.size(), 9u);
  EXPECT_EQ(path.endpoint_count, 2);
  ExpectSimpleAdjacentPath(path);
}

RasterMask Annulus(double inner, double outer) {
  RasterMask annulus(60, 60);
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 60; ++x) {
      const double r = std::hypot(x - 30.0, y - 30.0);
      annulus.set(x, y, r >= inner && r <= outer);
    }
  }
  return annulus;
}

TEST(LongestPathTest, PureCycleIsOpened) {
  const RasterMask ring = Skeletonize(Annulus(15.0, 19.5)).mask;
  const SkeletonPath path = LongestPath(Skeleton{ring});
  EXPECT_TRUE(path.loop);
  EXPECT_EQ(path.endpoint_count, 0);
  EXPECT_GE(static_cast<double>(path.pixels.size()), 0.9 * static_cast<double>(ring.Count()));
  ExpectSimpleAdjacentPath(path);
  const Pixel a = path.pixels.front();
  const Pixel b = path.pixels.back();
  EXPECT_LE(std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)), 1);
}

TEST(LongestPathTest, LoopWithSpurWalksStemThenLoop) {
  // The lone outer pixel at the bottom of the annulus thins to a spur.
  const RasterMask ring = Skeletonize(Annulus(15.0, 20.0)).mask;
  const SkeletonPath path = LongestPath(Skeleton{ring});
  EXPECT_TRUE(path.loop);
  EXPECT_EQ(path.endpoint_count, 1);
  EXPECT_GE(static_cast<double>(path.pixels.size()), 0.9 * static_cast<double>(ring.Count()));
  ExpectSimpleAdjacentPath(path);
}

TEST(LongestPathTest, EmptySkeletonRejected) {
  EXPECT_THROW(LongestPath(Skeleton{RasterMask(5, 5)}), InvalidInputError);
}

TEST(LongestPathTest, AgreesWithBruteForceOnSkeletons) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> coord(3.0, 45.0);
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    RasterMask mask(48, 48);
    for (int f = 0; f < 2; ++f) {
      const RasterMask one = RasterizeFiber(
          KeypointChain({{coord(rng), coord(rng)}, {coord(rng), coord(rng)}, {coord(rng), coord(rng)}}),
          4.0, 48, 48);
      for (std::size_t i = 0; i < one.bits().size(); ++i) mask.mutable_bits()[i] |= one.bits()[i];
    }
    const RasterMask skel = LargestComponent(Skeletonize(mask).mask);
    if (skel.Count() > 500 || skel.Count() < 2) continue;
    const SkeletonPath path = LongestPath(Skeleton{skel});
    if (path.endpoint_count < 2) continue;
    ExpectSimpleAdjacentPath(path);
    EXPECT_GE(static_cast<int>(path.pixels.size()), BruteForceLongest(skel));
    ++checked;
  }
  EXPECT_GT(checked, 40);
}

// Brute force: minimum distance to any false pixel or to the outside frame.
double BruteDistance(const RasterMask& m, int x, int y) {
  if (!m.at(x, y)) return 0.0;
  double best = 1e300;
  for (int yy = -1; yy <= m.height(); ++yy) {
    for (int xx = -1; xx <= m.width(); ++xx) {
      const bool background = !m.Contains(xx, yy) || !m.at(xx, yy);
      if (background) best = std::min(best, std::hypot(xx - x, yy - y));
    }
  }
  return best;
}

TEST(DistanceMapTest, SinglePixel) {
  RasterMask m(5, 5);
  m.set(2, 2);
  const DistanceMap d = ComputeDistanceMap(m);
  EXPECT_DOUBLE_EQ(d.at(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(d.at(0, 0), 0.0);
}

TEST(DistanceMapTest, AllTrueUsesVirtualBorder) {
  RasterMask m(21, 21);
  for (auto& b : m.mutable_bits()) b = 1;
  const DistanceMap d = ComputeDistanceMap(m);
  EXPECT_DOUBLE_EQ(d.at(10, 10), 11.0);
  EXPECT_DOUBLE_EQ(d.at(10, 10), BruteDistance(m, 10, 10));
}

TEST(DistanceMapTest, AllFalseIsZero) {
  const DistanceMap d = ComputeDistanceMap(RasterMask(7, 4));
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 7; ++x) EXPECT_EQ(d.at(x, y), 0.0);
  }
}

TEST(DistanceMapTest, MatchesBruteForceOnRandomMasks) {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution on(0.8);
  for (int trial = 0; trial < 10; ++trial) {
    RasterMask m(23, 17);
    for (auto& b : m.mutable_bits()) b = on(rng);
    const DistanceMap d = ComputeDistanceMap(m);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) EXPECT_NEAR(d.at(x, y), BruteDistance(m, x, y), 1e-9);
    }
  }
}

TEST(EstimateWidthTest, ConstantField) {
  const DistanceMap d(10, 10, std::vector<double>(100, 5.0));
  EXPECT_DOUBLE_EQ(EstimateWidth(d, KeypointChain({{1, 1}, {5.5, 3.2}, {8, 8}})), 10.0);
}

TEST(EstimateWidthTest, BandOfElevenRows) {
  RasterMask band(100, 31);
  for (int y = 10; y <= 20; ++y) {
    for (int x = 0; x < 100; ++x) band.set(x, y);
  }
  const DistanceMap d = ComputeDistanceMap(band);
  std::vector<Point2D> centerline;
  for (int x = 30; x <= 70; x += 5) centerline.push_back({static_cast<double>(x), 15.0});
  EXPECT_DOUBLE_EQ(EstimateWidth(d, KeypointChain(centerline)), 12.0);
}

TEST(EstimateWidthTest, MixedDistances) {
  std::vector<double> values(30, 0.0);
  values[0 * 10 + 1] = 4.0;
  values[1 * 10 + 5] = 5.0;
  values[2 * 10 + 8] = 6.0;
  const DistanceMap d(10, 3, values);
  EXPECT_DOUBLE_EQ(EstimateWidth(d, KeypointChain({{1, 0}, {5, 1}, {8, 2}})), 10.0);
}

TEST(EstimateWidthTest, OutOfBoundsRejected) {
  const DistanceMap d(10, 10, std::vector<double>(100, 1.0));
  EXPECT_THROW(EstimateWidth(d, KeypointChain({{1, 1}, {10.5, 3}})), InvalidInputError);
  EXPECT_THROW(EstimateWidth(d, KeypointChain({{-0.1, 1}, {3, 3}})), InvalidInputError);
}

TEST(AnnotateFiberTest, BlankImageHasNoFiber) {
  EXPECT_THROW(AnnotateFiber(GrayImage(64, 64, 30)), NoFiberError);
}

TEST(AnnotateFiberTest, StraightFiberRoundTrip) {
  const KeypointChain truth({{50, 100}, {350, 100.4}});
  const RasterMask mask = RasterizeFiber(truth, 9.0, 400, 200);
  const Annotation a = AnnotateFiber(Bimodal(mask, 41));
  EXPECT_NEAR(a.fiber.width, 9.0, 0.15 * 9.0);
  EXPECT_NEAR(a.fiber.length, 300.0, 0.05 * 300.0);
  EXPECT_EQ(a.fiber.keypoints.size(), 40u);
  EXPECT_TRUE(IsCanonicallyOrdered(a.fiber.keypoints));
  EXPECT_EQ(a.report.component_count, 1);
}

TEST(AnnotateFiberTest, SCurveRoundTrip) {
  const KeypointChain truth({{40, 60}, {110, 30}, {190, 90}, {270, 150}, {340, 120}});
  const double length = SplineLength(truth);
  const RasterMask mask = RasterizeFiber(truth, 11.0, 400, 200);
  const Annotation a = AnnotateFiber(Bimodal(mask, 43));
  EXPECT_NEAR(a.fiber.length, length, 0.05 * length);
  EXPECT_NEAR(a.fiber.width, 11.0, 0.15 * 11.0);
}

TEST(AnnotateFiberTest, ReportsExtraComponents) {
  RasterMask mask = RasterizeFiber(KeypointChain({{20, 40}, {180, 60}}), 9.0, 200, 100);
  for (int y = 85; y < 90; ++y) {
    for (int x = 10; x < 15; ++x) mask.set(x, y);
  }
  const Annotation a = AnnotateFiber(Bimodal(mask, 47));
  EXPECT_EQ(a.report.component_count, 2);
  EXPECT_NE(std::find(a.report.flags.begin(), a.report.flags.end(), "multiple_components"),
            a.report.flags.end());
  EXPECT_NEAR(a.fiber.length, SplineLength(KeypointChain({{20, 40}, {180, 60}})), 8.0);
}

}  // namespace
}  // namespace fiberlab
