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

#include "fiberlab/synthesis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <utility>

#include "fiberlab/errors.h"
#include "fiberlab/parallel.h"

namespace fiberlab {
namespace {

constexpr int kWalkSteps = 12;
constexpr int kMaxFiberAttempts = 200;
constexpr int kMaxPlacementAttempts = 100;
// Spacing of the polylines used by the self-intersection and self-approach
// tests.
constexpr double kProbeSpacing = 1.0;

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<Point2D> Probe(const KeypointChain& chain) {
  const CubicSpline spline(chain);
  const int count = std::max(2, static_cast<int>(std::ceil(spline.Length() / kProbeSpacing)) + 1);
  return spline.SampleByArcLength(count);
}

double Cross(Point2D o, Point2D a, Point2D b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool SegmentsCross(Point2D a, Point2D b, Point2D c, Point2D d) {
  const double d1 = Cross(c, d, a);
  const double d2 = Cross(c, d, b);
  const double d3 = Cross(a, b, c);
  const double d4 = Cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

std::size_t Skip(double steps) {
  return steps < 1.0 ? 1 : static_cast<std::size_t>(steps);
}

// True when two points at least 2 * width apart along the curve come
// closer than `width`, which would make the rasterized fiber touch itself.
bool ApproachesItself(const std::vector<Point2D>& probe, double width) {
  const auto gap = static_cast<std::size_t>(std::ceil(2.0 * width / kProbeSpacing));
  for (std::size_t i = 0; i + gap < probe.size(); ++i) {
    for (std::size_t j = i + gap; j < probe.size();) {
      const double d = Distance(probe[i], probe[j]);
      if (d < width) return true;
      // Neighbouring probes are at most one spacing apart.
      j += Skip((d - width) / kProbeSpacing);
    }
  }
  return false;
}

KeypointChain RandomWalk(const SynthConfig& cfg, bool curl, std::mt19937_64& rng) {
  std::normal_distribution<double> turn(0.0, cfg.curvature);
  double heading = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  // A curl spreads one full turn over four steps somewhere in the middle.
  const int curl_start = curl ? 2 + static_cast<int>(rng() % (kWalkSteps - 7)) : -1;
  const double curl_sign = rng() % 2 == 0 ? 1.0 : -1.0;
  std::vector<Point2D> points = {{0.0, 0.0}};
  for (int i = 0; i < kWalkSteps; ++i) {
    if (curl && i >= curl_start && i < curl_start + 4) {
      heading += curl_sign * std::numbers::pi / 2.0;
    } else if (cfg.curvature > 0.0) {
      heading += turn(rng);
    }
    points.push_back(points.back() + Point2D{std::cos(heading), std::sin(heading)});
  }
  return KeypointChain(std::move(points));
}

KeypointChain Scaled(const KeypointChain& chain, double factor) {
  std::vector<Point2D> points(chain.points().begin(), chain.points().end());
  for (Point2D& p : points) p = factor * p;
  return KeypointChain(std::move(points));
}

KeypointChain Shifted(const KeypointChain& chain, Point2D offset) {
  std::vector<Point2D> points(chain.points().begin(), chain.points().end());
  for (Point2D& p : points) p = p + offset;
  return KeypointChain(std::move(points));
}

bool Intersects(const RasterMask& a, const RasterMask& b) {
  const auto x = a.bits();
  const auto y = b.bits();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) return true;
  }
  return false;
}

void Merge(RasterMask& into, const RasterMask& from) {
  auto dst = into.mutable_bits();
  const auto src = from.bits();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

void StampDisc(RasterMask& mask, Point2D c, double r) {
  const int y0 = std::max(0, static_cast<int>(std::ceil(c.y - r)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::floor(c.y + r)));
  for (int y = y0; y <= y1; ++y) {
    const double half = std::sqrt(std::max(0.0, r * r - (y - c.y) * (y - c.y)));
    const int x0 = std::max(0, static_cast<int>(std::ceil(c.x - half)));
    const int x1 = std::min(mask.width() - 1, static_cast<int>(std::floor(c.x + half)));
    for (int x = x0; x <= x1; ++x) mask.set(x, y);
  }
}

double ParseDouble(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw InvalidConfigError("config key '" + key + "': not a number: '" + text + "'");
  }
  return value;
}

long long ParseInteger(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw InvalidConfigError("config key '" + key + "': not an integer: '" + text + "'");
  }
  return value;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw InvalidConfigError("config key '" + key + "': not a boolean: '" + text + "'");
}

}  // namespace

void ValidateSynthConfig(const SynthConfig& cfg) {
  auto positive_range = [](double lo, double hi) {
    return std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi >= lo;
  };
  if (cfg.canvas_width <= 0 || cfg.canvas_height <= 0) {
    throw InvalidConfigError("canvas dimensions must be positive");
  }
  if (cfg.min_fibers < 1 || cfg.max_fibers < cfg.min_fibers) {
    throw InvalidConfigError("fiber count range must satisfy 1 <= min <= max");
  }
  if (!positive_range(cfg.min_width, cfg.max_width)) {
    throw InvalidConfigError("width range must be positive with min <= max");
  }
  if (!positive_range(cfg.min_length, cfg.max_length)) {
    throw InvalidConfigError("length range must be positive with min <= max");
  }
  const double diagonal = std::hypot(cfg.canvas_width, cfg.canvas_height);
  if (cfg.max_length > 3.0 * diagonal) {
    throw InvalidConfigError("maximum fiber length exceeds three canvas diagonals");
  }
  if (!(cfg.curvature >= 0.0) || !std::isfinite(cfg.curvature)) {
    throw InvalidConfigError("curvature must be finite and non-negative");
  }
  if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) {
    throw InvalidConfigError("noise sigma must be finite and non-negative");
  }
  if (!(cfg.background >= 0.0 && cfg.background <= 255.0 && cfg.foreground >= 0.0 &&
        cfg.foreground <= 255.0)) {
    throw InvalidConfigError("intensities must lie in [0, 255]");
  }
}

SynthConfig SynthConfigFromKeyValues(const std::map<std::string, std::string>& values) {
  SynthConfig cfg;
  for (const auto& [key, text] : values) {
    if (key == "canvas_width") {
      cfg.canvas_width = static_cast<int>(ParseInteger(key, text));
    } else if (key == "canvas_height") {
      cfg.canvas_height = static_cast<int>(ParseInteger(key, text));
    } else if (key == "min_fibers") {
      cfg.min_fibers = static_cast<int>(ParseInteger(key, text));
    } else if (key == "max_fibers") {
      cfg.max_fibers = static_cast<int>(ParseInteger(key, text));
    } else if (key == "min_width") {
      cfg.min_width = ParseDouble(key, text);
    } else if (key == "max_width") {
      cfg.max_width = ParseDouble(key, text);
    } else if (key == "min_length") {
      cfg.min_length = ParseDouble(key, text);
    } else if (key == "max_length") {
      cfg.max_length = ParseDouble(key, text);
    } else if (key == "curvature") {
      cfg.curvature = ParseDouble(key, text);
    } else if (key == "loops") {
      cfg.loops = ParseBool(key, text);
    } else if (key == "clutter") {
      cfg.clutter = ParseBool(key, text);
    } else if (key == "overlaps") {
      cfg.overlaps = ParseBool(key, text);
    } else if (key == "background") {
      cfg.background = ParseDouble(key, text);
    } else if (key == "foreground") {
      cfg.foreground = ParseDouble(key, text);
    } else if (key == "noise_sigma") {
      cfg.noise_sigma = ParseDouble(key, text);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(ParseInteger(key, text));
    } else {
      throw InvalidConfigError("unknown config key '" + key + "'");
    }
  }
  ValidateSynthConfig(cfg);
  return cfg;
}

bool SelfIntersects(const KeypointChain& chain) {
  const std::vector<Point2D> probe = Probe(chain);
  for (std::size_t i = 0; i + 1 < probe.size(); ++i) {
    for (std::size_t j = i + 2; j + 1 < probe.size();) {
      if (SegmentsCross(probe[i], probe[i + 1], probe[j], probe[j + 1])) return true;
      // Probe segments are at most one spacing long, so segment j + m lies
      // at least d - (m + 1) * spacing from probe[i].
      const double d = Distance(probe[i], probe[j]);
      j += Skip(d / kProbeSpacing - 2.0);
    }
  }
  return false;
}

Fiber SampleFiber(const SynthConfig& cfg, std::mt19937_64& rng) {
  ValidateSynthConfig(cfg);
  const double width = Uniform(rng, cfg.min_width, cfg.max_width);
  const double target = Uniform(rng, cfg.min_length, cfg.max_length);
  const double margin = width / 2.0 + 1.0;
  std::optional<KeypointChain> fallback;
  for (int attempt = 0; attempt < kMaxFiberAttempts; ++attempt) {
    const bool curl = cfg.loops && rng() % 2 == 0;
    const KeypointChain walk = RandomWalk(cfg, curl, rng);
    const KeypointChain scaled = Scaled(walk, target / SplineLength(walk));
    const KeypointChain chain = ResampleKeypoints(scaled, kDefaultKeypointCount);
    const std::vector<Point2D> probe = Probe(chain);
    if (!cfg.loops && ApproachesItself(probe, width)) continue;
    double min_x = probe.front().x;
    double max_x = min_x;
    double min_y = probe.front().y;
    double max_y = min_y;
    for (const Point2D& p : probe) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const double lo_x = margin - min_x;
    const double hi_x = cfg.canvas_width - 1 - margin - max_x;
    const double lo_y = margin - min_y;
    const double hi_y = cfg.canvas_height - 1 - margin - max_y;
    if (lo_x > hi_x || lo_y > hi_y) {
      if (!fallback) {
        const Point2D centre{(cfg.canvas_width - 1) / 2.0 - (min_x + max_x) / 2.0,
                             (cfg.canvas_height - 1) / 2.0 - (min_y + max_y) / 2.0};
        fallback = Shifted(chain, centre);
      }
      continue;
    }
    const Point2D offset{Uniform(rng, lo_x, hi_x), Uniform(rng, lo_y, hi_y)};
    const KeypointChain placed = OrderKeypoints(Shifted(chain, offset));
    return {placed, width, SplineLength(placed)};
  }
  // Too long to fit: keep it centred and let the canvas clip it.
  if (fallback) {
    const KeypointChain placed = OrderKeypoints(*fallback);
    return {placed, width, SplineLength(placed)};
  }
  throw InvalidConfigError("could not sample a fiber that stays clear of itself");
}

SynthScene RenderScene(const std::vector<Fiber>& fibers, const SynthConfig& cfg,
                       std::mt19937_64& rng) {
  if (fibers.empty()) throw InvalidInputError("scene needs at least one fiber");
  const int w = cfg.canvas_width;
  const int h = cfg.canvas_height;
  SynthScene scene{GrayImage(w, h), fibers, RasterMask(w, h), RasterMask(w, h), {}};

  bool overlap = false;
  bool loop = false;
  for (const Fiber& fiber : fibers) {
    const RasterMask mask = RasterizeFiber(fiber, w, h);
    overlap = overlap || Intersects(scene.fiber_mask, mask);
    loop = loop || SelfIntersects(fiber.keypoints);
    Merge(scene.fiber_mask, mask);
  }

  if (cfg.clutter) {
    std::uniform_int_distribution<int> clusters(1, 3);
    std::uniform_int_distribution<int> discs(2, 4);
    std::uniform_int_distribution<std::size_t> pick(0, fibers.size() - 1);
    const int cluster_count = clusters(rng);
    for (int c = 0; c < cluster_count; ++c) {
      const Fiber& host = fibers[pick(rng)];
      const CubicSpline spline(host.keypoints);
      const Point2D anchor = spline.PointAtLength(Uniform(rng, 0.0, spline.Length()));
      const int disc_count = discs(rng);
      for (int d = 0; d < disc_count; ++d) {
        const double angle = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double reach = Uniform(rng, 0.5, 1.0) * host.width;
        const Point2D centre = anchor + reach * Point2D{std::cos(angle), std::sin(angle)};
        StampDisc(scene.clutter_mask, centre, Uniform(rng, 0.4, 0.9) * host.width);
      }
    }
    auto bits = scene.clutter_mask.mutable_bits();
    const auto fiber_bits = scene.fiber_mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] &= static_cast<std::uint8_t>(!fiber_bits[i]);
  }

  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  const auto fiber_bits = scene.fiber_mask.bits();
  const auto clutter_bits = scene.clutter_mask.bits();
  auto pixels = scene.image.mutable_pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    double v = (fiber_bits[i] || clutter_bits[i]) ? cfg.foreground : cfg.background;
    if (cfg.noise_sigma > 0.0) v += noise(rng);
    pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }

  auto flag = [](bool b) { return b ? FlagValue::kYes : FlagValue::kNo; };
  scene.flags = {flag(loop), flag(!scene.clutter_mask.Empty()), flag(overlap)};
  return scene;
}

SynthScene GenerateScene(const SynthConfig& cfg, std::uint64_t index) {
  ValidateSynthConfig(cfg);
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  const int count = std::uniform_int_distribution<int>(cfg.min_fibers, cfg.max_fibers)(rng);
  std::vector<Fiber> fibers;
  RasterMask occupied(cfg.canvas_width, cfg.canvas_height);
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      Fiber fiber = SampleFiber(cfg, rng);
      const RasterMask mask = RasterizeFiber(fiber, cfg.canvas_width, cfg.canvas_height);
      if (!cfg.overlaps && Intersects(occupied, mask)) continue;
      Merge(occupied, mask);
      fibers.push_back(std::move(fiber));
      break;
    }
  }
  return RenderScene(fibers, cfg, rng);
}

SynthDataset GenerateDataset(const SynthConfig& cfg, int scene_count, int threads) {
  ValidateSynthConfig(cfg);
  if (scene_count < 1) throw InvalidInputError("scene count must be at least 1");
  std::vector<std::optional<SynthScene>> slots(static_cast<std::size_t>(scene_count));
  ParallelFor(slots.size(), threads, [&](std::size_t i) { slots[i] = GenerateScene(cfg, i); });

  SynthDataset dataset;
  dataset.manifest.provenance = Provenance::kSynthetic;
  auto allowed = [](bool b) { return b ? FlagValue::kRandom : FlagValue::kNo; };
  dataset.manifest.subset = {allowed(cfg.loops), allowed(cfg.clutter), allowed(cfg.overlaps)};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    SynthScene& scene = *slots[i];
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05zu.png", i);
    ImageRecord record{name, cfg.canvas_width, cfg.canvas_height, scene.flags, Split::kUnsplit, {}};
    for (const Fiber& fiber : scene.fibers) record.fibers.push_back({fiber, std::nullopt, std::nullopt});
    dataset.manifest.images.push_back(std::move(record));
    dataset.scenes.push_back(std::move(scene));
  }
  return dataset;
}

void WriteDataset(const SynthDataset& dataset, const std::string& directory, int threads) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory + ": " + ec.message());
  const std::filesystem::path root(directory);
  ParallelFor(dataset.scenes.size(), threads, [&](std::size_t i) {
    WritePng(dataset.scenes[i].image, (root / dataset.manifest.images[i].file_name).string());
  });
  SaveAnnotations(dataset.manifest, (root / "manifest.json").string());
}

}  // namespace fiberlab
