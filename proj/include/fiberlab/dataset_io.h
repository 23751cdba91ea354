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

#ifndef FIBERLAB_DATASET_IO_H_
#define FIBERLAB_DATASET_IO_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fiberlab/geometry.h"
#include "fiberlab/image.h"

namespace fiberlab {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kDefaultTrainFraction = 0.85;

enum class FlagValue { kNo, kYes, kRandom };

// Presence of the three inhibiting factors: self-overlapping fibers
// (loops), particles stuck to fibers (clutter) and fiber-fiber overlap.
struct SubsetFlags {
  FlagValue loops = FlagValue::kNo;
  FlagValue clutter = FlagValue::kNo;
  FlagValue overlaps = FlagValue::kNo;

  friend bool operator==(const SubsetFlags&, const SubsetFlags&) = default;
  friend auto operator<=>(const SubsetFlags&, const SubsetFlags&) = default;
};

// Short form such as "[+l|?c|-o]".
std::string SubsetLabel(const SubsetFlags& flags);

enum class Split { kUnsplit, kTrain, kTest };
enum class Provenance { kManual, kSemiautomatic, kSynthetic, kPrediction };

std::string_view ToString(FlagValue value);
std::string_view ToString(Split split);
std::string_view ToString(Provenance provenance);

struct FiberRecord {
  Fiber fiber;
  // Prediction files only.
  std::optional<double> score;
  std::optional<std::string> mask_path;

  friend bool operator==(const FiberRecord&, const FiberRecord&) = default;
};

struct ImageRecord {
  std::string file_name;
  int width = 0;
  int height = 0;
  SubsetFlags flags;
  Split split = Split::kUnsplit;
  std::vector<FiberRecord> fibers;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetManifest {
  Provenance provenance = Provenance::kManual;
  SubsetFlags subset;
  std::vector<ImageRecord> images;

  std::size_t FiberCount() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Throws InvalidInputError naming the first offending record.
void ValidateManifest(const DatasetManifest& manifest);

std::string SerializeManifest(const DatasetManifest& manifest);
// Throws ParseError (with line or record context) or VersionError.
DatasetManifest ParseManifest(std::string_view text);

void SaveAnnotations(const DatasetManifest& manifest, const std::string& path);
DatasetManifest LoadAnnotations(const std::string& path);

// Assigns train/test per subset, where a subset is the set of images with
// equal flags. Each subset of n images gets floor(fraction * n) training
// images chosen by a seeded shuffle.
DatasetManifest SplitDataset(const DatasetManifest& manifest, double train_fraction,
                             std::uint64_t seed);

// Union of loop subsets, relabeled [+l|?c|?o].
DatasetManifest AggregateLoopSubsets(std::span<const DatasetManifest> manifests);

struct AugmentationParams {
  double flip_lr_prob = 0.5;
  double flip_ud_prob = 0.5;
  double contrast_min = 0.5;
  double contrast_max = 1.5;
  double brightness_min = 0.5;
  double brightness_max = 1.5;
};

void ValidateAugmentationParams(const AugmentationParams& params);

// One concrete draw of the augmentation parameters.
struct AugmentationChoice {
  bool flip_lr = false;
  bool flip_ud = false;
  double contrast = 1.0;
  double brightness = 1.0;
};

struct AugmentedSample {
  GrayImage image;
  std::vector<Fiber> fibers;
};

AugmentationChoice DrawAugmentation(const AugmentationParams& params, std::mt19937_64& rng);

// Flips pixels and keypoints, reorders every chain, then maps intensities
// through c * (v - 128) + b * 128 and clamps to [0, 255].
AugmentedSample ApplyAugmentation(const GrayImage& image, std::span<const Fiber> fibers,
                                  const AugmentationChoice& choice);

AugmentedSample Augment(const GrayImage& image, std::span<const Fiber> fibers,
                        const AugmentationParams& params, std::mt19937_64& rng);

// `key = value` lines. Blank lines and lines starting with '#' are
// ignored. Throws ParseError with the line number on malformed or
// duplicate keys.
std::map<std::string, std::string> ParseKeyValueConfig(std::string_view text);
std::map<std::string, std::string> LoadKeyValueConfig(const std::string& path);

}  // namespace fiberlab

#endif  // FIBERLAB_DATASET_IO_H_
