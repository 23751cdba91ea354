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

#include "fiberlab/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

struct MaskSummary {
  std::optional<Box> box;
  std::size_t count = 0;
};

MaskSummary Summarize(const RasterMask& mask) {
  return {BoundingBox(mask), mask.Count()};
}

double SummaryIou(const RasterMask& a, const MaskSummary& sa, const RasterMask& b,
                  const MaskSummary& sb) {
  if (sa.count + sb.count == 0) return 0.0;
  std::size_t inter = 0;
  if (sa.box && sb.box) {
    const int x0 = std::max(sa.box->x0, sb.box->x0);
    const int x1 = std::min(sa.box->x1, sb.box->x1);
    const int y0 = std::max(sa.box->y0, sb.box->y0);
    const int y1 = std::min(sa.box->y1, sb.box->y1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) inter += a.at(x, y) && b.at(x, y);
    }
  }
  return static_cast<double>(inter) / static_cast<double>(sa.count + sb.count - inter);
}

std::vector<std::size_t> ByDescendingScore(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

void CheckScores(std::span<const double> scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInputError("detection scores must be finite");
  }
}

bool Near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

std::vector<double> DefaultIouThresholds() {
  std::vector<double> out;
  for (int i = 50; i <= 95; i += 5) out.push_back(i / 100.0);
  return out;
}

IouMatrix ComputeIouMatrix(std::span<const RasterMask> detections,
                           std::span<const RasterMask> ground_truths) {
  std::vector<MaskSummary> det_summary;
  std::vector<MaskSummary> gt_summary;
  for (const RasterMask& m : detections) det_summary.push_back(Summarize(m));
  for (const RasterMask& m : ground_truths) gt_summary.push_back(Summarize(m));
  const RasterMask* first = !detections.empty()     ? &detections.front()
                            : !ground_truths.empty() ? &ground_truths.front()
                                                     : nullptr;
  for (const auto& masks : {detections, ground_truths}) {
    for (const RasterMask& m : masks) {
      if (m.width() != first->width() || m.height() != first->height()) {
        throw InvalidInputError("all masks must share one canvas");
      }
    }
  }
  IouMatrix out(detections.size(), std::vector<double>(ground_truths.size(), 0.0));
  for (std::size_t d = 0; d < detections.size(); ++d) {
    for (std::size_t g = 0; g < ground_truths.size(); ++g) {
      out[d][g] = SummaryIou(detections[d], det_summary[d], ground_truths[g], gt_summary[g]);
    }
  }
  return out;
}

MatchResult MatchDetections(std::span<const double> scores, const IouMatrix& iou,
                            std::size_t ground_truth_count, double threshold,
                            DuplicatePolicy policy) {
  CheckScores(scores);
  if (iou.size() != scores.size()) throw InvalidInputError("IoU rows must match detections");
  for (const auto& row : iou) {
    if (row.size() != ground_truth_count) {
      throw InvalidInputError("IoU columns must match ground truths");
    }
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidInputError("IoU threshold must lie in [0, 1]");
  }
  MatchResult result;
  result.outcomes.assign(scores.size(), Outcome::kFalsePositive);
  std::vector<bool> taken(ground_truth_count, false);
  for (const std::size_t d : ByDescendingScore(scores)) {
    std::ptrdiff_t best = -1;
    double best_iou = -1.0;
    bool duplicate = false;
    for (std::size_t g = 0; g < ground_truth_count; ++g) {
      const double v = iou[d][g];
      // Zero overlap never matches, even at threshold 0.
      if (v < threshold || v <= 0.0) continue;
      if (taken[g]) {
        duplicate = true;
      } else if (v > best_iou) {
        best = static_cast<std::ptrdiff_t>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      result.pairs.push_back({d, static_cast<std::size_t>(best), best_iou});
      result.outcomes[d] = Outcome::kTruePositive;
      ++result.tp;
    } else if (duplicate && policy == DuplicatePolicy::kPaper) {
      result.outcomes[d] = Outcome::kDuplicate;
      ++result.fn;
    } else {
      ++result.fp;
    }
  }
  result.fn += static_cast<std::size_t>(std::count(taken.begin(), taken.end(), false));
  return result;
}

MatchResult MatchDetections(std::span<const ScoredMask> detections,
                            std::span<const RasterMask> ground_truths, double threshold,
                            DuplicatePolicy policy) {
  std::vector<RasterMask> masks;
  std::vector<double> scores;
  for (const ScoredMask& d : detections) {
    masks.push_back(d.mask);
    scores.push_back(d.score);
  }
  return MatchDetections(scores, ComputeIouMatrix(masks, ground_truths), ground_truths.size(),
                         threshold, policy);
}

PrecisionRecall ComputePrecisionRecall(const MatchResult& match, std::size_t total_ground_truths) {
  PrecisionRecall out;
  if (match.tp + match.fp > 0) {
    out.precision = static_cast<double>(match.tp) / static_cast<double>(match.tp + match.fp);
  }
  if (total_ground_truths > 0) {
    out.recall = static_cast<double>(match.tp) / static_cast<double>(total_ground_truths);
  }
  return out;
}

PrCurve BuildPrCurve(std::span<const ScoredOutcome> detections, std::size_t total_ground_truths) {
  std::vector<double> scores;
  for (const ScoredOutcome& d : detections) scores.push_back(d.score);
  CheckScores(scores);
  const std::vector<std::size_t> order = ByDescendingScore(scores);
  PrCurve curve;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const ScoredOutcome& d = detections[order[i]];
    tp += d.outcome == Outcome::kTruePositive;
    fp += d.outcome == Outcome::kFalsePositive;
    const bool last_of_score =
        i + 1 == order.size() || detections[order[i + 1]].score != d.score;
    if (!last_of_score) continue;
    PrPoint p;
    p.score = d.score;
    p.recall = total_ground_truths == 0
                   ? 0.0
                   : static_cast<double>(tp) / static_cast<double>(total_ground_truths);
    p.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back(p);
  }
  double running = 0.0;
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    running = std::max(running, it->precision);
    it->interpolated = running;
  }
  return curve;
}

PrCurve ComputePrCurve(std::span<const ScoredMask> detections,
                       std::span<const RasterMask> ground_truths, double threshold,
                       DuplicatePolicy policy) {
  const MatchResult match = MatchDetections(detections, ground_truths, threshold, policy);
  std::vector<ScoredOutcome> scored;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    scored.push_back({detections[i].score, match.outcomes[i]});
  }
  return BuildPrCurve(scored, ground_truths.size());
}

double AveragePrecision(const PrCurve& curve) {
  double sum = 0.0;
  std::size_t next = 0;
  for (int j = 0; j < kApRecallSamples; ++j) {
    const double r = j / static_cast<double>(kApRecallSamples - 1);
    while (next < curve.points.size() && curve.points[next].recall < r) ++next;
    if (next == curve.points.size()) break;
    sum += curve.points[next].interpolated;
  }
  return sum / kApRecallSamples;
}

ApReport MeanAp(std::span<const ApImage> images, std::span<const double> thresholds,
                DuplicatePolicy policy) {
  if (thresholds.empty()) throw InvalidInputError("at least one IoU threshold is required");
  std::size_t total = 0;
  for (const ApImage& image : images) total += image.ground_truth_count;
  ApReport report;
  for (const double t : thresholds) {
    std::vector<ScoredOutcome> scored;
    for (const ApImage& image : images) {
      const MatchResult m =
          MatchDetections(image.scores, image.iou, image.ground_truth_count, t, policy);
      for (std::size_t d = 0; d < image.scores.size(); ++d) {
        scored.push_back({image.scores[d], m.outcomes[d]});
      }
    }
    const double ap = AveragePrecision(BuildPrCurve(scored, total));
    report.ap_by_threshold.emplace_back(t, ap);
    if (Near(t, 0.5)) report.ap50 = ap;
    if (Near(t, 0.75)) report.ap75 = ap;
  }
  double sum = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& [t, ap] : report.ap_by_threshold) {
    sum += ap;
    lo = std::min(lo, ap);
    hi = std::max(hi, ap);
  }
  // Clamped so rounding cannot push the mean outside the averaged values.
  report.map = std::clamp(sum / static_cast<double>(report.ap_by_threshold.size()), lo, hi);
  return report;
}

ApReport MeanAp(std::span<const ScoredMask> detections, std::span<const RasterMask> ground_truths,
                std::span<const double> thresholds, DuplicatePolicy policy) {
  ApImage image;
  std::vector<RasterMask> masks;
  for (const ScoredMask& d : detections) {
    masks.push_back(d.mask);
    image.scores.push_back(d.score);
  }
  image.iou = ComputeIouMatrix(masks, ground_truths);
  image.ground_truth_count = ground_truths.size();
  return MeanAp(std::span(&image, 1), thresholds, policy);
}

double PercentageError(double predicted, double target) {
  if (target == 0.0) throw InvalidInputError("percentage error needs a nonzero target");
  return (predicted - target) / target * 100.0;
}

double Mape(std::span<const double> matched_errors, std::size_t unmatched, MapeMode mode) {
  const std::size_t total = matched_errors.size() + unmatched;
  if (total == 0) throw InvalidInputError("MAPE needs at least one instance");
  double sum = 0.0;
  for (double e : matched_errors) sum += std::abs(e);
  if (mode == MapeMode::kStrict) sum += 100.0 * static_cast<double>(unmatched);
  return sum / static_cast<double>(total);
}

std::optional<Box> BoundingBox(const RasterMask& mask) {
  std::optional<Box> box;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (!box) {
        box = Box{x, y, x, y};
      } else {
        box->x0 = std::min(box->x0, x);
        box->x1 = std::max(box->x1, x);
        box->y1 = y;
      }
    }
  }
  return box;
}

double BoxIou(const Box& a, const Box& b) {
  auto area = [](const Box& r) {
    return static_cast<double>(r.x1 - r.x0 + 1) * static_cast<double>(r.y1 - r.y0 + 1);
  };
  const int iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0) + 1;
  const int ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0) + 1;
  const double inter = iw > 0 && ih > 0 ? static_cast<double>(iw) * ih : 0.0;
  return inter / (area(a) + area(b) - inter);
}

Histogram WeightedHistogram(std::span<const double> values, std::span<const double> weights,
                            int bin_count, double lo, double hi) {
  if (values.size() != weights.size()) {
    throw InvalidInputError("values and weights differ in length");
  }
  if (bin_count < 1) throw InvalidInputError("bin count must be at least 1");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidInputError("histogram range must satisfy lo < hi");
  }
  Histogram h{lo, hi, std::vector<double>(static_cast<std::size_t>(bin_count), 0.0)};
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInputError("weights must be >= 0");
    if (!(v >= lo && v <= hi)) throw InvalidInputError("value outside histogram range");
    const auto bin = std::min<std::size_t>(
        static_cast<std::size_t>(bin_count - 1),
        static_cast<std::size_t>((v - lo) / (hi - lo) * bin_count));
    h.density[bin] += w;
    total += w;
  }
  if (!(total > 0.0)) throw InvalidInputError("total histogram weight must be positive");
  const double scale = 1.0 / (total * h.bin_width());
  for (double& d : h.density) d *= scale;
  return h;
}

std::pair<double, double> PooledRange(std::span<const double> a, std::span<const double> b) {
  if (a.empty() && b.empty()) throw InvalidInputError("no values to bin");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& values : {a, b}) {
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

Histogram WeightedHistogram(std::span<const double> values, std::span<const double> weights,
                            int bin_count) {
  const auto [lo, hi] = PooledRange(values, {});
  return WeightedHistogram(values, weights, bin_count, lo, hi);
}

double KlDivergence(const Histogram& p, const Histogram& q) {
  if (p.lo != q.lo || p.hi != q.hi || p.density.size() != q.density.size()) {
    throw InvalidInputError("histograms use different bins");
  }
  double sum = 0.0;
  bool shared = false;
  for (std::size_t i = 0; i < p.density.size(); ++i) {
    if (p.density[i] <= 0.0 || q.density[i] <= 0.0) continue;
    const double pm = p.Mass(i);
    sum += pm * std::log(pm / q.Mass(i));
    shared = true;
  }
  if (!shared) throw UndefinedResultError("histograms share no nonzero bin");
  return sum;
}

PreparedImage PrepareImage(std::span<const TruthInstance> truths,
                           std::span<const PredictedInstance> predictions) {
  PreparedImage out;
  std::vector<RasterMask> truth_masks;
  std::vector<RasterMask> predicted_masks;
  std::vector<std::optional<Box>> truth_boxes;
  for (const TruthInstance& t : truths) {
    truth_masks.push_back(t.mask);
    truth_boxes.push_back(BoundingBox(t.mask));
    out.truth_widths.push_back(t.fiber.width);
    out.truth_lengths.push_back(t.fiber.length);
  }
  for (const PredictedInstance& p : predictions) {
    predicted_masks.push_back(p.mask);
    out.ap.scores.push_back(p.score);
    out.predicted_widths.push_back(p.fiber.width);
    out.predicted_lengths.push_back(p.fiber.length);
    const std::optional<Box> box = BoundingBox(p.mask);
    std::vector<double> row;
    for (const auto& tb : truth_boxes) row.push_back(box && tb ? BoxIou(*box, *tb) : 0.0);
    out.box_iou.push_back(std::move(row));
  }
  out.ap.iou = ComputeIouMatrix(predicted_masks, truth_masks);
  out.ap.ground_truth_count = truths.size();
  return out;
}

namespace {

SizeErrors Summarize(std::span<const double> errors, std::size_t unmatched,
                     std::span<const double> truth, std::span<const double> predicted,
                     std::span<const double> predicted_weights, int bin_count) {
  SizeErrors out;
  if (!errors.empty() || unmatched > 0) {
    out.mape_strict = Mape(errors, unmatched, MapeMode::kStrict);
    out.mape_loose = Mape(errors, unmatched, MapeMode::kLoose);
  }
  const double weight = std::accumulate(predicted_weights.begin(), predicted_weights.end(), 0.0);
  if (truth.empty() || predicted.empty() || !(weight > 0.0)) return out;
  const auto [lo, hi] = PooledRange(truth, predicted);
  const std::vector<double> ones(truth.size(), 1.0);
  out.truth_histogram = WeightedHistogram(truth, ones, bin_count, lo, hi);
  out.predicted_histogram = WeightedHistogram(predicted, predicted_weights, bin_count, lo, hi);
  try {
    out.kl = KlDivergence(*out.truth_histogram, *out.predicted_histogram);
  } catch (const UndefinedResultError&) {
    out.kl.reset();
  }
  return out;
}

}  // namespace

EvaluationReport Evaluate(std::span<const PreparedImage> images,
                          const EvaluationOptions& options) {
  EvaluationReport report;
  std::vector<ApImage> ap_images;
  std::vector<double> width_errors;
  std::vector<double> length_errors;
  std::vector<double> truth_widths;
  std::vector<double> truth_lengths;
  std::vector<double> predicted_widths;
  std::vector<double> predicted_lengths;
  std::vector<double> predicted_scores;
  std::size_t unmatched = 0;
  for (const PreparedImage& image : images) {
    ap_images.push_back(image.ap);
    const std::size_t truths = image.ap.ground_truth_count;
    const std::size_t predictions = image.ap.scores.size();
    report.truth_count += truths;
    report.prediction_count += predictions;
    const MatchResult m = MatchDetections(image.ap.scores, image.box_iou, truths,
                                          kInstanceMatchIou, DuplicatePolicy::kCoco);
    for (const Match& pair : m.pairs) {
      width_errors.push_back(PercentageError(image.predicted_widths[pair.detection],
                                             image.truth_widths[pair.ground_truth]));
      length_errors.push_back(PercentageError(image.predicted_lengths[pair.detection],
                                              image.truth_lengths[pair.ground_truth]));
    }
    report.matched_count += m.pairs.size();
    unmatched += (truths - m.pairs.size()) + (predictions - m.pairs.size());
    truth_widths.insert(truth_widths.end(), image.truth_widths.begin(), image.truth_widths.end());
    truth_lengths.insert(truth_lengths.end(), image.truth_lengths.begin(),
                         image.truth_lengths.end());
    predicted_widths.insert(predicted_widths.end(), image.predicted_widths.begin(),
                            image.predicted_widths.end());
    predicted_lengths.insert(predicted_lengths.end(), image.predicted_lengths.begin(),
                             image.predicted_lengths.end());
    predicted_scores.insert(predicted_scores.end(), image.ap.scores.begin(), image.ap.scores.end());
  }
  report.ap = MeanAp(ap_images, options.thresholds, options.policy);
  report.width = Summarize(width_errors, unmatched, truth_widths, predicted_widths,
                           predicted_scores, options.bin_count);
  report.length = Summarize(length_errors, unmatched, truth_lengths, predicted_lengths,
                            predicted_scores, options.bin_count);
  return report;
}

}  // namespace fiberlab
