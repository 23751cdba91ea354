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

#include "fiberlab/dataset_io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "fiberlab/errors.h"
#include "json.hpp"

namespace fiberlab {
namespace {

using Json = nlohmann::ordered_json;

char FlagSymbol(FlagValue v) {
  switch (v) {
    case FlagValue::kNo:
      return '-';
    case FlagValue::kYes:
      return '+';
    case FlagValue::kRandom:
      return '?';
  }
  return '?';
}

template <typename Enum, std::size_t N>
Enum FromString(const std::string& text, const std::array<Enum, N>& values,
                const std::string& context) {
  for (Enum v : values) {
    if (ToString(v) == text) return v;
  }
  throw ParseError(context + ": unknown value '" + text + "'");
}

constexpr std::array kFlagValues = {FlagValue::kNo, FlagValue::kYes, FlagValue::kRandom};
constexpr std::array kSplits = {Split::kUnsplit, Split::kTrain, Split::kTest};
constexpr std::array kProvenances = {Provenance::kManual, Provenance::kSemiautomatic,
                                     Provenance::kSynthetic, Provenance::kPrediction};

Json FlagsToJson(const SubsetFlags& flags) {
  Json out = Json::object();
  out["loops"] = ToString(flags.loops);
  out["clutter"] = ToString(flags.clutter);
  out["overlaps"] = ToString(flags.overlaps);
  return out;
}

const Json& Field(const Json& object, const char* key, const std::string& context) {
  if (!object.is_object()) throw ParseError(context + ": expected an object");
  const auto it = object.find(key);
  if (it == object.end()) throw ParseError(context + ": missing field '" + key + "'");
  return *it;
}

double NumberField(const Json& object, const char* key, const std::string& context) {
  const Json& v = Field(object, key, context);
  if (!v.is_number()) throw ParseError(context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

int IntField(const Json& object, const char* key, const std::string& context) {
  const Json& v = Field(object, key, context);
  if (!v.is_number_integer()) {
    throw ParseError(context + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

std::string StringField(const Json& object, const char* key, const std::string& context) {
  const Json& v = Field(object, key, context);
  if (!v.is_string()) throw ParseError(context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

SubsetFlags FlagsFromJson(const Json& json, const std::string& context) {
  SubsetFlags flags;
  flags.loops = FromString(StringField(json, "loops", context), kFlagValues, context + ".loops");
  flags.clutter =
      FromString(StringField(json, "clutter", context), kFlagValues, context + ".clutter");
  flags.overlaps =
      FromString(StringField(json, "overlaps", context), kFlagValues, context + ".overlaps");
  return flags;
}

void CheckVersion(const Json& object, const std::string& context) {
  const int version = IntField(object, "schema_version", context);
  if (version != kSchemaVersion) {
    throw VersionError(context + ": unsupported schema_version " + std::to_string(version));
  }
}

FiberRecord FiberFromJson(const Json& json, const std::string& context) {
  const Json& points = Field(json, "keypoints", context);
  if (!points.is_array()) throw ParseError(context + ": 'keypoints' must be an array");
  std::vector<Point2D> keypoints;
  keypoints.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Json& p = points[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError(context + ".keypoints[" + std::to_string(i) + "]: expected [x, y]");
    }
    keypoints.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  try {
    FiberRecord record{Fiber{KeypointChain(std::move(keypoints)),
                             NumberField(json, "width_px", context),
                             NumberField(json, "length_px", context)},
                       std::nullopt, std::nullopt};
    if (json.contains("score")) record.score = NumberField(json, "score", context);
    if (json.contains("mask_path")) record.mask_path = StringField(json, "mask_path", context);
    return record;
  } catch (const InvalidInputError& e) {
    throw ParseError(context + ": " + e.what());
  }
}

std::size_t LineOfByte(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

std::string_view ToString(FlagValue value) {
  switch (value) {
    case FlagValue::kNo:
      return "no";
    case FlagValue::kYes:
      return "yes";
    case FlagValue::kRandom:
      return "random";
  }
  return "random";
}

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kUnsplit:
      return "unsplit";
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
  }
  return "unsplit";
}

std::string_view ToString(Provenance provenance) {
  switch (provenance) {
    case Provenance::kManual:
      return "manual";
    case Provenance::kSemiautomatic:
      return "semiautomatic";
    case Provenance::kSynthetic:
      return "synthetic";
    case Provenance::kPrediction:
      return "prediction";
  }
  return "manual";
}

std::string SubsetLabel(const SubsetFlags& flags) {
  std::string out = "[";
  out += FlagSymbol(flags.loops);
  out += "l|";
  out += FlagSymbol(flags.clutter);
  out += "c|";
  out += FlagSymbol(flags.overlaps);
  out += "o]";
  return out;
}

std::size_t DatasetManifest::FiberCount() const {
  std::size_t total = 0;
  for (const ImageRecord& image : images) total += image.fibers.size();
  return total;
}

void ValidateManifest(const DatasetManifest& manifest) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < manifest.images.size(); ++i) {
    const ImageRecord& image = manifest.images[i];
    const std::string context = "images[" + std::to_string(i) + "] (" + image.file_name + ")";
    if (image.file_name.empty()) throw InvalidInputError(context + ": empty file_name");
    if (!names.insert(image.file_name).second) {
      throw InvalidInputError(context + ": duplicate file_name");
    }
    if (image.width <= 0 || image.height <= 0) {
      throw InvalidInputError(context + ": image dimensions must be positive");
    }
    for (std::size_t f = 0; f < image.fibers.size(); ++f) {
      const FiberRecord& record = image.fibers[f];
      const std::string fiber_context = context + ".fibers[" + std::to_string(f) + "]";
      try {
        ValidateFiber(record.fiber);
      } catch (const InvalidInputError& e) {
        throw InvalidInputError(fiber_context + ": " + e.what());
      }
      if (record.score && !(*record.score >= 0.0 && *record.score <= 1.0)) {
        throw InvalidInputError(fiber_context + ": score must lie in [0, 1]");
      }
    }
  }
}

std::string SerializeManifest(const DatasetManifest& manifest) {
  ValidateManifest(manifest);
  Json root = Json::object();
  root["schema_version"] = kSchemaVersion;
  root["provenance"] = ToString(manifest.provenance);
  root["subset"] = FlagsToJson(manifest.subset);
  Json images = Json::array();
  for (const ImageRecord& image : manifest.images) {
    Json record = Json::object();
    record["schema_version"] = kSchemaVersion;
    record["file_name"] = image.file_name;
    record["width_px"] = image.width;
    record["height_px"] = image.height;
    record["flags"] = FlagsToJson(image.flags);
    record["split"] = ToString(image.split);
    Json fibers = Json::array();
    for (const FiberRecord& fiber : image.fibers) {
      Json f = Json::object();
      Json points = Json::array();
      for (const Point2D& p : fiber.fiber.keypoints.points()) points.push_back({p.x, p.y});
      f["keypoints"] = std::move(points);
      f["width_px"] = fiber.fiber.width;
      f["length_px"] = fiber.fiber.length;
      if (fiber.score) f["score"] = *fiber.score;
      if (fiber.mask_path) f["mask_path"] = *fiber.mask_path;
      fibers.push_back(std::move(f));
    }
    record["fibers"] = std::move(fibers);
    images.push_back(std::move(record));
  }
  root["images"] = std::move(images);
  return root.dump(2) + "\n";
}

DatasetManifest ParseManifest(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("line " + std::to_string(LineOfByte(text, e.byte)) + ": " + e.what());
  }
  CheckVersion(root, "manifest");
  DatasetManifest manifest;
  manifest.provenance =
      FromString(StringField(root, "provenance", "manifest"), kProvenances, "manifest.provenance");
  manifest.subset = FlagsFromJson(Field(root, "subset", "manifest"), "manifest.subset");
  const Json& images = Field(root, "images", "manifest");
  if (!images.is_array()) throw ParseError("manifest: 'images' must be an array");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Json& json = images[i];
    const std::string context = "images[" + std::to_string(i) + "]";
    CheckVersion(json, context);
    ImageRecord image;
    image.file_name = StringField(json, "file_name", context);
    image.width = IntField(json, "width_px", context);
    image.height = IntField(json, "height_px", context);
    image.flags = FlagsFromJson(Field(json, "flags", context), context + ".flags");
    image.split = FromString(StringField(json, "split", context), kSplits, context + ".split");
    const Json& fibers = Field(json, "fibers", context);
    if (!fibers.is_array()) throw ParseError(context + ": 'fibers' must be an array");
    for (std::size_t f = 0; f < fibers.size(); ++f) {
      image.fibers.push_back(
          FiberFromJson(fibers[f], context + ".fibers[" + std::to_string(f) + "]"));
    }
    manifest.images.push_back(std::move(image));
  }
  try {
    ValidateManifest(manifest);
  } catch (const InvalidInputError& e) {
    throw ParseError(e.what());
  }
  return manifest;
}

void SaveAnnotations(const DatasetManifest& manifest, const std::string& path) {
  const std::string text = SerializeManifest(manifest);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw IoError("failed writing " + path);
}

namespace {

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

DatasetManifest LoadAnnotations(const std::string& path) {
  const std::string text = ReadText(path);
  try {
    return ParseManifest(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

DatasetManifest SplitDataset(const DatasetManifest& manifest, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInputError("train fraction must lie in (0, 1)");
  }
  DatasetManifest out = manifest;
  std::map<SubsetFlags, std::vector<std::size_t>> subsets;
  for (std::size_t i = 0; i < out.images.size(); ++i) subsets[out.images[i].flags].push_back(i);
  std::mt19937_64 rng(seed);
  for (auto& [flags, members] : subsets) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return out.images[a].file_name < out.images[b].file_name;
    });
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n = members.size();
    // The epsilon keeps products such as 0.85 * 20 from rounding down.
    const auto train = static_cast<std::size_t>(std::floor(train_fraction * n + 1e-9));
    for (std::size_t j = 0; j < n; ++j) {
      out.images[members[j]].split = j < train ? Split::kTrain : Split::kTest;
    }
  }
  return out;
}

DatasetManifest AggregateLoopSubsets(std::span<const DatasetManifest> manifests) {
  if (manifests.empty()) throw InvalidInputError("no manifests to aggregate");
  DatasetManifest out;
  out.provenance = manifests.front().provenance;
  out.subset = {FlagValue::kYes, FlagValue::kRandom, FlagValue::kRandom};
  for (std::size_t m = 0; m < manifests.size(); ++m) {
    if (manifests[m].subset.loops != FlagValue::kYes) {
      throw InvalidInputError("manifest " + std::to_string(m) + " is not a loop subset " +
                              SubsetLabel(manifests[m].subset));
    }
    if (manifests[m].provenance != out.provenance) {
      throw InvalidInputError("manifest " + std::to_string(m) + " has a different provenance");
    }
    out.images.insert(out.images.end(), manifests[m].images.begin(), manifests[m].images.end());
  }
  ValidateManifest(out);
  return out;
}

void ValidateAugmentationParams(const AugmentationParams& params) {
  auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  auto range = [](double lo, double hi) { return lo > 0.0 && hi >= lo && std::isfinite(hi); };
  if (!probability(params.flip_lr_prob) || !probability(params.flip_ud_prob)) {
    throw InvalidInputError("flip probabilities must lie in [0, 1]");
  }
  if (!range(params.contrast_min, params.contrast_max) ||
      !range(params.brightness_min, params.brightness_max)) {
    throw InvalidInputError("contrast and brightness ranges must be positive");
  }
}

AugmentationChoice DrawAugmentation(const AugmentationParams& params, std::mt19937_64& rng) {
  ValidateAugmentationParams(params);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentationChoice choice;
  choice.flip_lr = unit(rng) < params.flip_lr_prob;
  choice.flip_ud = unit(rng) < params.flip_ud_prob;
  choice.contrast = params.contrast_min + (params.contrast_max - params.contrast_min) * unit(rng);
  choice.brightness =
      params.brightness_min + (params.brightness_max - params.brightness_min) * unit(rng);
  return choice;
}

AugmentedSample ApplyAugmentation(const GrayImage& image, std::span<const Fiber> fibers,
                                  const AugmentationChoice& choice) {
  const int w = image.width();
  const int h = image.height();
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = choice.flip_ud ? h - 1 - y : y;
    for (int x = 0; x < w; ++x) {
      const int sx = choice.flip_lr ? w - 1 - x : x;
      const double v =
          choice.contrast * (image.at(sx, sy) - 128.0) + choice.brightness * 128.0;
      out.set(x, y, static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
    }
  }
  std::vector<Fiber> moved;
  moved.reserve(fibers.size());
  for (const Fiber& fiber : fibers) {
    std::vector<Point2D> points(fiber.keypoints.points().begin(), fiber.keypoints.points().end());
    for (Point2D& p : points) {
      if (choice.flip_lr) p.x = (w - 1) - p.x;
      if (choice.flip_ud) p.y = (h - 1) - p.y;
    }
    moved.push_back({OrderKeypoints(KeypointChain(std::move(points))), fiber.width, fiber.length});
  }
  return {std::move(out), std::move(moved)};
}

AugmentedSample Augment(const GrayImage& image, std::span<const Fiber> fibers,
                        const AugmentationParams& params, std::mt19937_64& rng) {
  return ApplyAugmentation(image, fibers, DrawAugmentation(params, rng));
}

std::map<std::string, std::string> ParseKeyValueConfig(std::string_view text) {
  std::map<std::string, std::string> out;
  auto trim = [](std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return std::string_view{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    const std::size_t end = text.find('\n');
    const std::string_view line = trim(text.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    const std::string key(trim(line.substr(0, eq)));
    if (eq == std::string_view::npos || key.empty()) {
      throw ParseError("line " + std::to_string(line_number) + ": expected key = value");
    }
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ParseError("line " + std::to_string(line_number) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> LoadKeyValueConfig(const std::string& path) {
  try {
    return ParseKeyValueConfig(ReadText(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace fiberlab
