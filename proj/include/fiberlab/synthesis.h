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

#ifndef FIBERLAB_SYNTHESIS_H_
#define FIBERLAB_SYNTHESIS_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fiberlab/dataset_io.h"
#include "fiberlab/geometry.h"
#include "fiberlab/image.h"

namespace fiberlab {

// Every range is sampled uniformly and inclusively.
struct SynthConfig {
  int canvas_width = 512;
  int canvas_height = 512;
  int min_fibers = 1;
  int max_fibers = 3;
  double min_width = 8.0;
  double max_width = 20.0;
  double min_length = 150.0;
  double max_length = 400.0;
  // Standard deviation of the heading change, in radians, between steps of
  // the control random walk. Zero gives straight fibers.
  double curvature = 0.25;
  bool loops = false;
  bool clutter = false;
  bool overlaps = false;
  double background = 40.0;
  double foreground = 200.0;
  double noise_sigma = 8.0;
  std::uint64_t seed = 0;
};

// Throws InvalidConfigError.
void ValidateSynthConfig(const SynthConfig& cfg);

// Keys match the field names above; unknown keys are rejected.
SynthConfig SynthConfigFromKeyValues(const std::map<std::string, std::string>& values);

// True when two non-adjacent pieces of the densely sampled spline cross.
bool SelfIntersects(const KeypointChain& chain);

Fiber SampleFiber(const SynthConfig& cfg, std::mt19937_64& rng);

struct SynthScene {
  GrayImage image;
  std::vector<Fiber> fibers;
  // Union of the rasterized annotations, before noise.
  RasterMask fiber_mask;
  // Particles attached to fibers; foreground in the image but not part of
  // any annotation.
  RasterMask clutter_mask;
  SubsetFlags flags;
};

// Throws InvalidInputError for an empty fiber list.
SynthScene RenderScene(const std::vector<Fiber>& fibers, const SynthConfig& cfg,
                       std::mt19937_64& rng);

// Scene `index` draws from its own stream seeded by (cfg.seed, index).
SynthScene GenerateScene(const SynthConfig& cfg, std::uint64_t index);

struct SynthDataset {
  std::vector<SynthScene> scenes;
  DatasetManifest manifest;
};

SynthDataset GenerateDataset(const SynthConfig& cfg, int scene_count, int threads = 1);

// Writes one PNG per scene plus `manifest.json` into `directory`.
void WriteDataset(const SynthDataset& dataset, const std::string& directory, int threads = 1);

}  // namespace fiberlab

#endif  // FIBERLAB_SYNTHESIS_H_
