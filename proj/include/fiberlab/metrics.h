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

#ifndef FIBERLAB_METRICS_H_
#define FIBERLAB_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fiberlab/geometry.h"

namespace fiberlab {

inline constexpr int kApRecallSamples = 101;
inline constexpr double kInstanceMatchIou = 0.5;
inline constexpr int kDefaultHistogramBins = 20;

// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> DefaultIouThresholds();

// How a detection that overlaps an already matched ground truth is scored.
// kPaper counts it as a false negative, kCoco as a false positive.
enum class DuplicatePolicy { kPaper, kCoco };

enum class Outcome { kTruePositive, kFalsePositive, kDuplicate };

struct ScoredMask {
  RasterMask mask;
  double score = 0.0;
};

// iou[d][g] between detection d and ground truth g.
using IouMatrix = std::vector<std::vector<double>>;

// Throws InvalidInputError when masks do not share one canvas.
IouMatrix ComputeIouMatrix(std::span<const RasterMask> detections,
                           std::span<const RasterMask> ground_truths);

struct Match {
  std::size_t detection = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<Match> pairs;
  // Indexed like the detections.
  std::vector<Outcome> outcomes;
};

// Detections are visited by descending score (ties in input order); each
// takes the highest-IoU free ground truth with IoU >= threshold.
MatchResult MatchDetections(std::span<const double> scores, const IouMatrix& iou,
                            std::size_t ground_truth_count, double threshold,
                            DuplicatePolicy policy = DuplicatePolicy::kPaper);
MatchResult MatchDetections(std::span<const ScoredMask> detections,
                            std::span<const RasterMask> ground_truths, double threshold,
                            DuplicatePolicy policy = DuplicatePolicy::kPaper);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// Precision is 0 without detections, recall is 0 without ground truths.
PrecisionRecall ComputePrecisionRecall(const MatchResult& match, std::size_t total_ground_truths);

struct PrPoint {
  double recall = 0.0;
  // Raw cumulative precision at this score cut-off.
  double precision = 0.0;
  // Maximum precision at this or any higher recall.
  double interpolated = 0.0;
  double score = 0.0;
};

struct PrCurve {
  // One point per distinct score, by descending score.
  std::vector<PrPoint> points;
};

struct ScoredOutcome {
  double score = 0.0;
  Outcome outcome = Outcome::kFalsePositive;
};

PrCurve BuildPrCurve(std::span<const ScoredOutcome> detections, std::size_t total_ground_truths);
PrCurve ComputePrCurve(std::span<const ScoredMask> detections,
                       std::span<const RasterMask> ground_truths, double threshold,
                       DuplicatePolicy policy = DuplicatePolicy::kPaper);

// Mean interpolated precision at recall j / 100, j = 0..100; zero past the
// curve's largest recall.
double AveragePrecision(const PrCurve& curve);

struct ApReport {
  std::vector<std::pair<double, double>> ap_by_threshold;
  double map = 0.0;
  std::optional<double> ap50;
  std::optional<double> ap75;
};

// Per-image inputs for dataset-level AP: detections from every image are
// ranked together.
struct ApImage {
  std::vector<double> scores;
  IouMatrix iou;
  std::size_t ground_truth_count = 0;
};

// Throws InvalidInputError for an empty threshold list.
ApReport MeanAp(std::span<const ApImage> images, std::span<const double> thresholds,
                DuplicatePolicy policy = DuplicatePolicy::kPaper);
ApReport MeanAp(std::span<const ScoredMask> detections, std::span<const RasterMask> ground_truths,
                std::span<const double> thresholds,
                DuplicatePolicy policy = DuplicatePolicy::kPaper);

// Signed, in percent. Throws InvalidInputError for a zero target.
double PercentageError(double predicted, double target);

enum class MapeMode { kStrict, kLoose };

// Unmatched instances count as 100% (strict) or 0% (loose). Throws
// InvalidInputError when there are no instances at all.
double Mape(std::span<const double> matched_errors, std::size_t unmatched, MapeMode mode);

// Inclusive pixel bounds.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  friend bool operator==(const Box&, const Box&) = default;
};

std::optional<Box> BoundingBox(const RasterMask& mask);
double BoxIou(const Box& a, const Box& b);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> density;

  double bin_width() const { return (hi - lo) / static_cast<double>(density.size()); }
  double Mass(std::size_t bin) const { return density[bin] * bin_width(); }
};

// Weighted density over `bin_count` uniform bins on [lo, hi]; the last bin
// is closed. Values outside the range are rejected.
Histogram WeightedHistogram(std::span<const double> values, std::span<const double> weights,
                            int bin_count, double lo, double hi);
// Same, over [min, max] of `values`, widened by one unit when degenerate.
Histogram WeightedHistogram(std::span<const double> values, std::span<const double> weights,
                            int bin_count);

// Bin range covering both samples, for histograms that are compared.
std::pair<double, double> PooledRange(std::span<const double> a, std::span<const double> b);

// Sum of P log(P / Q) over bin masses, natural log, skipping bins where
// either side is empty. Throws InvalidInputError when the bins differ and
// UndefinedResultError when no bin is shared.
double KlDivergence(const Histogram& p, const Histogram& q);

// Dataset evaluation.

struct TruthInstance {
  Fiber fiber;
  RasterMask mask;
};

struct PredictedInstance {
  Fiber fiber;
  RasterMask mask;
  double score = 0.0;
};

// Everything evaluation needs from one image, without the masks.
struct PreparedImage {
  ApImage ap;
  IouMatrix box_iou;
  std::vector<double> truth_widths;
  std::vector<double> truth_lengths;
  std::vector<double> predicted_widths;
  std::vector<double> predicted_lengths;
};

PreparedImage PrepareImage(std::span<const TruthInstance> truths,
                           std::span<const PredictedInstance> predictions);

struct EvaluationOptions {
  std::vector<double> thresholds = DefaultIouThresholds();
  DuplicatePolicy policy = DuplicatePolicy::kPaper;
  int bin_count = kDefaultHistogramBins;
};

struct SizeErrors {
  std::optional<double> mape_strict;
  std::optional<double> mape_loose;
  // Unset when either distribution is empty or no bin is shared.
  std::optional<double> kl;
  std::optional<Histogram> truth_histogram;
  std::optional<Histogram> predicted_histogram;
};

struct EvaluationReport {
  ApReport ap;
  std::size_t truth_count = 0;
  std::size_t prediction_count = 0;
  // Instances paired by box IoU for the size errors.
  std::size_t matched_count = 0;
  SizeErrors width;
  SizeErrors length;
};

// Size errors pair predictions with ground truths by box IoU >= 0.5 (greedy
// by score); unmatched ground truths and unmatched predictions both count
// as unmatched. Histograms weight ground truths by 1 and predictions by
// their score.
EvaluationReport Evaluate(std::span<const PreparedImage> images, const EvaluationOptions& options);

}  // namespace fiberlab

#endif  // FIBERLAB_METRICS_H_
