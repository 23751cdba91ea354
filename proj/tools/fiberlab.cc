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

// Command-line front end for the fiberlab library.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fiberlab/annotation.h"
#include "fiberlab/dataset_io.h"
#include "fiberlab/errors.h"
#include "fiberlab/geometry.h"
#include "fiberlab/image.h"
#include "fiberlab/metrics.h"
#include "fiberlab/parallel.h"
#include "fiberlab/pruning.h"
#include "fiberlab/synthesis.h"
#include "json.hpp"

namespace fiberlab {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void WriteText(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

std::string Dump(const Json& json) { return json.dump(2) + "\n"; }

Json Optional(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

fs::path BaseDir(const std::string& manifest_path) {
  return fs::path(manifest_path).parent_path();
}

RasterMask LoadDetectionMask(const fs::path& base, const ImageRecord& image,
                             const FiberRecord& record) {
  const RasterMask mask = ReadMaskPng((base / *record.mask_path).string());
  if (mask.width() != image.width || mask.height() != image.height) {
    throw InvalidInputError(*record.mask_path + ": mask size differs from " + image.file_name);
  }
  return mask;
}

// ---- annotate ---------------------------------------------------------------

struct AnnotateArgs {
  std::string directory;
  std::string output;
  int denoise_radius = 1;
  int keypoints = kDefaultKeypointCount;
  std::string polarity = "bright";
};

void RunAnnotate(const AnnotateArgs& args, int threads) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(args.directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  AnnotationOptions options;
  options.segment.denoise_radius = args.denoise_radius;
  options.segment.polarity = args.polarity == "dark" ? Polarity::kDark : Polarity::kBright;
  options.keypoint_count = args.keypoints;

  std::vector<ImageRecord> records(files.size());
  std::vector<std::string> notes(files.size());
  ParallelFor(files.size(), threads, [&](std::size_t i) {
    const GrayImage image = ReadPng(files[i].string());
    ImageRecord& record = records[i];
    record.file_name = files[i].filename().string();
    record.width = image.width();
    record.height = image.height();
    try {
      const Annotation a = AnnotateFiber(image, options);
      record.fibers.push_back({a.fiber, std::nullopt, std::nullopt});
      for (const std::string& flag : a.report.flags) notes[i] += " " + flag;
    } catch (const NoFiberError& e) {
      notes[i] = std::string(" no fiber: ") + e.what();
    }
  });
  DatasetManifest manifest;
  manifest.provenance = Provenance::kSemiautomatic;
  manifest.images = std::move(records);
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!notes[i].empty()) std::cerr << files[i].filename().string() << ":" << notes[i] << "\n";
  }
  const std::string output =
      args.output.empty() ? (fs::path(args.directory) / "annotations.json").string() : args.output;
  SaveAnnotations(manifest, output);
  std::cout << "annotated " << manifest.FiberCount() << " of " << files.size() << " images\n";
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string output;
  int count = 1;
  std::optional<std::uint64_t> seed;
};

void RunSynth(const SynthArgs& args, int threads) {
  SynthConfig cfg;
  if (!args.config.empty()) cfg = SynthConfigFromKeyValues(LoadKeyValueConfig(args.config));
  if (args.seed) cfg.seed = *args.seed;
  const SynthDataset dataset = GenerateDataset(cfg, args.count, threads);
  WriteDataset(dataset, args.output, threads);
  std::cout << "wrote " << dataset.scenes.size() << " scenes with "
            << dataset.manifest.FiberCount() << " fibers\n";
}

// ---- resample / order -------------------------------------------------------

template <typename Fn>
void RewriteFibers(const std::string& input, const std::string& output, int threads, Fn&& fn) {
  DatasetManifest manifest = LoadAnnotations(input);
  std::vector<FiberRecord*> fibers;
  for (ImageRecord& image : manifest.images) {
    for (FiberRecord& record : image.fibers) fibers.push_back(&record);
  }
  ParallelFor(fibers.size(), threads, [&](std::size_t i) { fn(fibers[i]->fiber); });
  WriteText(SerializeManifest(manifest), output);
}

// ---- prune ------------------------------------------------------------------

struct PruneArgs {
  std::string gt;
  std::string pred;
  std::string output;
  std::string report;
};

void RunPrune(const PruneArgs& args, int threads) {
  DatasetManifest pred = LoadAnnotations(args.pred);
  const fs::path base = BaseDir(args.pred);
  std::optional<DatasetManifest> gt;
  std::map<std::string, const ImageRecord*> gt_images;
  if (!args.gt.empty()) {
    gt = LoadAnnotations(args.gt);
    for (const ImageRecord& image : gt->images) gt_images[image.file_name] = &image;
  }

  struct Job {
    const ImageRecord* image;
    FiberRecord* record;
  };
  std::vector<Job> jobs;
  for (ImageRecord& image : pred.images) {
    for (std::size_t f = 0; f < image.fibers.size(); ++f) {
      if (!image.fibers[f].mask_path) {
        throw InvalidInputError(image.file_name + ": fiber " + std::to_string(f) +
                                " has no mask_path");
      }
      jobs.push_back({&image, &image.fibers[f]});
    }
  }

  struct Outcome {
    std::size_t removed = 0;
    bool skipped = false;
    std::optional<double> gt_iou_before;
    std::optional<double> gt_iou_after;
  };
  std::vector<Outcome> outcomes(jobs.size());
  ParallelFor(jobs.size(), threads, [&](std::size_t i) {
    const ImageRecord& image = *jobs[i].image;
    Fiber& fiber = jobs[i].record->fiber;
    const Detection detection{fiber, LoadDetectionMask(base, image, *jobs[i].record),
                              jobs[i].record->score.value_or(1.0)};
    const PruneResult result = PruneKeypoints(detection);
    outcomes[i].removed = result.trace.size() - 1;
    outcomes[i].skipped = result.skipped;
    const Fiber before = fiber;
    fiber.keypoints = result.keypoints;
    const auto truth = gt_images.find(image.file_name);
    if (truth == gt_images.end()) return;
    // Quality against the best-overlapping ground-truth fiber.
    const RasterMask mask_before = RasterizeFiber(before, image.width, image.height);
    const RasterMask mask_after = RasterizeFiber(fiber, image.width, image.height);
    double best_before = 0.0;
    double best_after = 0.0;
    for (const FiberRecord& t : truth->second->fibers) {
      const RasterMask m = RasterizeFiber(t.fiber, image.width, image.height);
      const double iou = MaskIou(mask_before, m);
      if (iou > best_before) {
        best_before = iou;
        best_after = MaskIou(mask_after, m);
      }
    }
    outcomes[i].gt_iou_before = best_before;
    outcomes[i].gt_iou_after = best_after;
  });

  const std::string output =
      args.output.empty() ? fs::path(args.pred).replace_extension(".pruned.json").string()
                          : args.output;
  SaveAnnotations(pred, output);

  std::size_t changed = 0;
  std::size_t skipped = 0;
  std::size_t improved = 0;
  std::size_t compared = 0;
  double sum_before = 0.0;
  double sum_after = 0.0;
  Json per_detection = Json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Outcome& o = outcomes[i];
    changed += o.removed > 0;
    skipped += o.skipped;
    Json entry = Json::object();
    entry["image"] = jobs[i].image->file_name;
    entry["removed_keypoints"] = o.removed;
    entry["skipped"] = o.skipped;
    entry["gt_iou_before"] = Optional(o.gt_iou_before);
    entry["gt_iou_after"] = Optional(o.gt_iou_after);
    per_detection.push_back(entry);
    if (o.gt_iou_before) {
      ++compared;
      sum_before += *o.gt_iou_before;
      sum_after += *o.gt_iou_after;
      improved += *o.gt_iou_after > *o.gt_iou_before;
    }
  }
  std::cout << "pruned " << jobs.size() << " detections: " << changed << " changed, "
            << skipped << " skipped\n";
  if (compared > 0) {
    std::cout << "mean IoU vs ground truth " << sum_before / compared << " -> "
              << sum_after / compared << " (" << improved << " improved)\n";
  }
  if (!args.report.empty()) {
    Json report = Json::object();
    report["detections"] = jobs.size();
    report["changed"] = changed;
    report["skipped"] = skipped;
    report["compared_with_ground_truth"] = compared;
    report["improved"] = improved;
    report["per_detection"] = per_detection;
    WriteText(Dump(report), args.report);
  }
}

// ---- evaluate ---------------------------------------------------------------

std::vector<double> ParseThresholds(const std::string& text) {
  std::vector<double> out;
  const auto parse = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw InvalidInputError("bad threshold '" + s + "'");
    return v;
  };
  const std::size_t first = text.find(':');
  if (first != std::string::npos) {
    const std::size_t second = text.find(':', first + 1);
    if (second == std::string::npos) {
      throw InvalidInputError("threshold range must be start:step:stop");
    }
    const double start = parse(text.substr(0, first));
    const double step = parse(text.substr(first + 1, second - first - 1));
    const double stop = parse(text.substr(second + 1));
    if (!(step > 0.0) || stop < start) throw InvalidInputError("bad threshold range " + text);
    const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    // Rounded to suppress accumulation error, so 0.5:0.05:0.95 yields 0.75 exactly.
    for (int i = 0; i <= n; ++i) out.push_back(std::round((start + i * step) * 1e9) / 1e9);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse(item));
  }
  for (double t : out) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInputError("IoU thresholds must lie in [0, 1]");
  }
  if (out.empty()) throw InvalidInputError("no IoU thresholds given");
  return out;
}

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::string output;
  std::string thresholds = "0.5:0.05:0.95";
  std::string policy = "paper";
  std::string mape = "both";
  std::string histograms;
  int bins = kDefaultHistogramBins;
};

std::string FileStem(const SubsetFlags& flags) {
  return "loops-" + std::string(ToString(flags.loops)) + "_clutter-" +
         std::string(ToString(flags.clutter)) + "_overlaps-" +
         std::string(ToString(flags.overlaps));
}

Json SizeJson(const SizeErrors& e, const std::string& mape) {
  Json out = Json::object();
  if (mape != "loose") out["mape_strict"] = Optional(e.mape_strict);
  if (mape != "strict") out["mape_loose"] = Optional(e.mape_loose);
  out["kl_divergence"] = Optional(e.kl);
  return out;
}

void WriteHistogram(const SizeErrors& e, const std::string& path) {
  if (!e.truth_histogram) return;
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,truth_density,predicted_density\n";
  const Histogram& t = *e.truth_histogram;
  for (std::size_t i = 0; i < t.density.size(); ++i) {
    out << t.lo + i * t.bin_width() << "," << t.lo + (i + 1) * t.bin_width() << ","
        << t.density[i] << "," << e.predicted_histogram->density[i] << "\n";
  }
  WriteText(out.str(), path);
}

void RunEvaluate(const EvaluateArgs& args, int threads) {
  const DatasetManifest gt = LoadAnnotations(args.gt);
  const DatasetManifest pred = LoadAnnotations(args.pred);
  const fs::path pred_base = BaseDir(args.pred);
  std::map<std::string, const ImageRecord*> pred_images;
  std::map<std::string, std::size_t> gt_index;
  for (std::size_t i = 0; i < gt.images.size(); ++i) gt_index[gt.images[i].file_name] = i;
  for (const ImageRecord& image : pred.images) {
    const auto it = gt_index.find(image.file_name);
    if (it == gt_index.end()) {
      throw InvalidInputError("prediction for unknown image " + image.file_name);
    }
    const ImageRecord& truth = gt.images[it->second];
    if (truth.width != image.width || truth.height != image.height) {
      throw InvalidInputError(image.file_name + ": prediction and ground truth differ in size");
    }
    for (const FiberRecord& r : image.fibers) {
      if (!r.score) throw InvalidInputError(image.file_name + ": prediction without score");
    }
    pred_images[image.file_name] = &image;
  }

  EvaluationOptions options;
  options.thresholds = ParseThresholds(args.thresholds);
  options.policy = args.policy == "coco" ? DuplicatePolicy::kCoco : DuplicatePolicy::kPaper;
  options.bin_count = args.bins;

  std::vector<PreparedImage> prepared(gt.images.size());
  ParallelFor(gt.images.size(), threads, [&](std::size_t i) {
    const ImageRecord& image = gt.images[i];
    std::vector<TruthInstance> truths;
    for (const FiberRecord& r : image.fibers) {
      truths.push_back({r.fiber, RasterizeFiber(r.fiber, image.width, image.height)});
    }
    std::vector<PredictedInstance> preds;
    const auto it = pred_images.find(image.file_name);
    if (it != pred_images.end()) {
      for (const FiberRecord& r : it->second->fibers) {
        RasterMask mask = r.mask_path ? LoadDetectionMask(pred_base, image, r)
                                      : RasterizeFiber(r.fiber, image.width, image.height);
        preds.push_back({r.fiber, std::move(mask), *r.score});
      }
    }
    prepared[i] = PrepareImage(truths, preds);
  });

  std::map<std::string, std::vector<std::size_t>> groups;
  std::map<std::string, std::string> stems{{"all", "all"}};
  for (std::size_t i = 0; i < gt.images.size(); ++i) {
    groups["all"].push_back(i);
    const std::string label = SubsetLabel(gt.images[i].flags);
    groups[label].push_back(i);
    stems[label] = FileStem(gt.images[i].flags);
  }
  if (!args.histograms.empty()) fs::create_directories(args.histograms);

  Json report = Json::object();
  report["ground_truth"] = fs::path(args.gt).filename().string();
  report["predictions"] = fs::path(args.pred).filename().string();
  report["duplicate_policy"] = args.policy;
  report["iou_thresholds"] = options.thresholds;
  report["histogram_bins"] = options.bin_count;
  Json subsets = Json::object();
  for (const auto& [label, indices] : groups) {
    std::vector<PreparedImage> images;
    for (std::size_t i : indices) images.push_back(prepared[i]);
    const EvaluationReport r = Evaluate(images, options);
    Json s = Json::object();
    s["images"] = indices.size();
    s["ground_truths"] = r.truth_count;
    s["predictions"] = r.prediction_count;
    s["size_matches"] = r.matched_count;
    s["ap50"] = Optional(r.ap.ap50);
    s["ap75"] = Optional(r.ap.ap75);
    s["map"] = r.ap.map;
    Json by = Json::array();
    for (const auto& [t, ap] : r.ap.ap_by_threshold) by.push_back({{"iou", t}, {"ap", ap}});
    s["ap_by_threshold"] = by;
    s["width"] = SizeJson(r.width, args.mape);
    s["length"] = SizeJson(r.length, args.mape);
    subsets[label] = s;
    if (!args.histograms.empty()) {
      const fs::path dir(args.histograms);
      WriteHistogram(r.width, (dir / (stems[label] + "_width.csv")).string());
      WriteHistogram(r.length, (dir / (stems[label] + "_length.csv")).string());
    }
  }
  report["subsets"] = subsets;
  WriteText(Dump(report), args.output);
}

// ---- split / bic ------------------------------------------------------------

struct BicArgs {
  std::string input;
  std::string output;
  int min_count = kMinKeypointCount;
  int max_count = kMaxKeypointCount;
  double percentile = kDefaultKeypointPercentile;
  int samples = kDefaultSsrSamples;
};

void RunBic(const BicArgs& args, int threads) {
  const DatasetManifest manifest = LoadAnnotations(args.input);
  std::vector<KeypointChain> chains;
  for (const ImageRecord& image : manifest.images) {
    for (const FiberRecord& r : image.fibers) chains.push_back(r.fiber.keypoints);
  }
  if (chains.empty()) throw InvalidInputError(args.input + ": no fibers");
  KeypointCountOptions options;
  options.min_count = args.min_count;
  options.max_count = args.max_count;
  options.percentile = args.percentile;
  options.ssr.sample_count = args.samples;
  options.threads = threads;
  const std::vector<int> counts = BestKeypointCounts(chains, options);
  Json report = Json::object();
  report["fibers"] = chains.size();
  report["min_keypoints"] = args.min_count;
  report["max_keypoints"] = args.max_count;
  report["percentile"] = args.percentile;
  report["ssr_samples"] = args.samples;
  report["optimal_keypoint_count"] = NearestRankPercentile(counts, args.percentile);
  report["per_fiber"] = counts;
  WriteText(Dump(report), args.output);
}

int Main(int argc, char** argv) {
  CLI::App app{"Fiber morphology toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  AnnotateArgs annotate;
  auto* annotate_cmd = app.add_subcommand("annotate", "Annotate single-fiber images");
  annotate_cmd->add_option("directory", annotate.directory, "Directory of PNG images")
      ->required()
      ->check(CLI::ExistingDirectory);
  annotate_cmd->add_option("--denoise-radius", annotate.denoise_radius)
      ->check(CLI::Range(0, 64));
  annotate_cmd->add_option("--keypoints", annotate.keypoints)->check(CLI::Range(2, 10000));
  annotate_cmd->add_option("--polarity", annotate.polarity)
      ->check(CLI::IsMember({"bright", "dark"}));
  annotate_cmd->add_option("-o,--output", annotate.output,
                           "Annotation file (default <directory>/annotations.json)");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", synth.config, "Key-value config file")
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--count", synth.count)->check(CLI::Range(0, 10000000));
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("-o,--output", synth.output, "Output directory")->required();

  int resample_k = kDefaultKeypointCount;
  std::string resample_in, resample_out;
  auto* resample_cmd = app.add_subcommand("resample", "Resample keypoints to a fixed count");
  resample_cmd->add_option("--keypoints", resample_k)->check(CLI::Range(2, 10000));
  resample_cmd->add_option("input", resample_in)->required()->check(CLI::ExistingFile);
  resample_cmd->add_option("-o,--output", resample_out, "Output file (default stdout)");

  std::string order_in, order_out;
  auto* order_cmd = app.add_subcommand("order", "Order keypoints topmost-first");
  order_cmd->add_option("input", order_in)->required()->check(CLI::ExistingFile);
  order_cmd->add_option("-o,--output", order_out, "Output file (default stdout)");

  PruneArgs prune;
  auto* prune_cmd = app.add_subcommand("prune", "Correct predicted keypoints by pruning");
  prune_cmd->add_option("--gt", prune.gt, "Ground truth, for the quality summary")
      ->check(CLI::ExistingFile);
  prune_cmd->add_option("--pred", prune.pred)->required()->check(CLI::ExistingFile);
  prune_cmd->add_option("-o,--output", prune.output,
                        "Output file (default <pred>.pruned.json next to the input)");
  prune_cmd->add_option("--report", prune.report, "Per-detection JSON report");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate_cmd->add_option("--gt", evaluate.gt)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--pred", evaluate.pred)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--thresholds", evaluate.thresholds,
                           "start:step:stop or comma-separated list");
  evaluate_cmd->add_option("--duplicate-policy", evaluate.policy)
      ->check(CLI::IsMember({"paper", "coco"}));
  evaluate_cmd->add_option("--mape", evaluate.mape)
      ->check(CLI::IsMember({"strict", "loose", "both"}));
  evaluate_cmd->add_option("--bins", evaluate.bins)->check(CLI::Range(1, 100000));
  evaluate_cmd->add_option("--histograms", evaluate.histograms, "Directory for histogram CSVs");
  evaluate_cmd->add_option("-o,--output", evaluate.output, "Report file (default stdout)");

  double fraction = kDefaultTrainFraction;
  std::uint64_t split_seed = 0;
  std::string split_in, split_out;
  auto* split_cmd = app.add_subcommand("split", "Assign train/test per subset");
  split_cmd->add_option("--fraction", fraction)->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", split_seed);
  split_cmd->add_option("input", split_in)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("-o,--output", split_out, "Output file (default stdout)");

  BicArgs bic;
  auto* bic_cmd = app.add_subcommand("bic", "Select the keypoint count");
  bic_cmd->add_option("--min", bic.min_count);
  bic_cmd->add_option("--max", bic.max_count);
  bic_cmd->add_option("--percentile", bic.percentile)->check(CLI::Range(0.0, 100.0));
  bic_cmd->add_option("--samples", bic.samples, "Spline samples per SSR evaluation");
  bic_cmd->add_option("input", bic.input)->required()->check(CLI::ExistingFile);
  bic_cmd->add_option("-o,--output", bic.output, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*annotate_cmd) {
      RunAnnotate(annotate, threads);
    } else if (*synth_cmd) {
      RunSynth(synth, threads);
    } else if (*resample_cmd) {
      RewriteFibers(resample_in, resample_out, threads, [&](Fiber& f) {
        f.keypoints = ResampleKeypoints(f.keypoints, resample_k);
      });
    } else if (*order_cmd) {
      RewriteFibers(order_in, order_out, threads,
                    [](Fiber& f) { f.keypoints = OrderKeypoints(f.keypoints); });
    } else if (*prune_cmd) {
      RunPrune(prune, threads);
    } else if (*evaluate_cmd) {
      RunEvaluate(evaluate, threads);
    } else if (*split_cmd) {
      WriteText(SerializeManifest(SplitDataset(LoadAnnotations(split_in), fraction, split_seed)),
                split_out);
    } else if (*bic_cmd) {
      RunBic(bic, threads);
    }
  } catch (const std::exception& e) {
    std::cerr << "fiberlab: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace fiberlab

int main(int argc, char** argv) { return fiberlab::Main(argc, argv); }
