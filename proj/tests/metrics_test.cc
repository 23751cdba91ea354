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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fiberlab/errors.h"

namespace fiberlab {
namespace {

RasterMask Rect(int w, int h, int x0, int y0, int x1, int y1) {
  RasterMask m(w, h);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) m.set(x, y);
  }
  return m;
}

// Picks the highest remaining score each round, lowest index on ties, and
// pairs it with the best free ground truth.
struct OracleCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t dup = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

OracleCounts OracleMatch(const std::vector<double>& scores, const IouMatrix& iou,
                         std::size_t gts, double threshold) {
  OracleCounts out;
  std::vector<bool> done(scores.size(), false);
  std::vector<bool> used(gts, false);
  for (std::size_t round = 0; round < scores.size(); ++round) {
    std::size_t d = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!done[i] && (d == scores.size() || scores[i] > scores[d])) d = i;
    }
    done[d] = true;
    std::size_t best = gts;
    bool blocked = false;
    for (std::size_t g = 0; g < gts; ++g) {
      if (iou[d][g] < threshold || iou[d][g] == 0.0) continue;
      if (used[g]) {
        blocked = true;
      } else if (best == gts || iou[d][g] > iou[d][best]) {
        best = g;
      }
    }
    if (best < gts) {
      used[best] = true;
      ++out.tp;
      out.pairs.emplace_back(d, best);
    } else if (blocked) {
      ++out.dup;
    } else {
      ++out.fp;
    }
  }
  return out;
}

// Random axis-aligned boxes; detections jitter a ground truth or land anywhere.
ApImage RandomScene(std::mt19937_64& rng, std::vector<RasterMask>* dets = nullptr,
                    std::vector<RasterMask>* truths = nullptr) {
  constexpr int kSize = 32;
  std::uniform_int_distribution<int> coord(0, kSize - 1);
  std::uniform_int_distribution<int> jitter(-2, 2);
  auto random_box = [&] {
    int x0 = coord(rng), x1 = coord(rng), y0 = coord(rng), y1 = coord(rng);
    return Rect(kSize, kSize, std::min(x0, x1), std::min(y0, y1), std::max(x0, x1),
                std::max(y0, y1));
  };
  std::vector<Box> gt_boxes;
  std::vector<RasterMask> gts;
  const int gt_count = static_cast<int>(rng() % 6);
  for (int i = 0; i < gt_count; ++i) {
    gts.push_back(random_box());
    gt_boxes.push_back(*BoundingBox(gts.back()));
  }
  std::vector<RasterMask> masks;
  ApImage image;
  const int det_count = static_cast<int>(rng() % 6);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int i = 0; i < det_count; ++i) {
    if (!gt_boxes.empty() && rng() % 3 != 0) {
      const Box b = gt_boxes[rng() % gt_boxes.size()];
      auto clamp = [](int v) { return std::clamp(v, 0, kSize - 1); };
      int x0 = clamp(b.x0 + jitter(rng)), x1 = clamp(b.x1 + jitter(rng));
      int y0 = clamp(b.y0 + jitter(rng)), y1 = clamp(b.y1 + jitter(rng));
      masks.push_back(Rect(kSize, kSize, std::min(x0, x1), std::min(y0, y1), std::max(x0, x1),
                           std::max(y0, y1)));
    } else {
      masks.push_back(random_box());
    }
    // Coarse scores so ties occur.
    image.scores.push_back(std::round(score(rng) * 10.0) / 10.0);
  }
  image.iou = ComputeIouMatrix(masks, gts);
  image.ground_truth_count = gts.size();
  if (dets) *dets = masks;
  if (truths) *truths = gts;
  return image;
}

TEST(MatchTest, SingleGoodMatch) {
  const MatchResult m = MatchDetections(std::vector<double>{0.9}, {{0.8}}, 1, 0.5);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 0u);
  EXPECT_EQ(m.fn, 0u);
}

TEST(MatchTest, SingleWeakMatch) {
  const MatchResult m = MatchDetections(std::vector<double>{0.9}, {{0.3}}, 1, 0.5);
  EXPECT_EQ(m.tp, 0u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 1u);
}

TEST(MatchTest, DuplicateCountsAsMissUnderDefaultPolicy) {
  const IouMatrix iou{{0.7}, {0.9}};
  const MatchResult m = MatchDetections(std::vector<double>{0.9, 0.8}, iou, 1, 0.5);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 0u);
  EXPECT_EQ(m.fn, 1u);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].detection, 0u);
  EXPECT_EQ(m.outcomes[1], Outcome::kDuplicate);
}

TEST(MatchTest, DuplicateCountsAsFalsePositiveUnderCoco) {
  const IouMatrix iou{{0.7}, {0.9}};
  const MatchResult m =
      MatchDetections(std::vector<double>{0.9, 0.8}, iou, 1, 0.5, DuplicatePolicy::kCoco);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 0u);
}

TEST(MatchTest, PrefersHighestIouFreeTruth) {
  const IouMatrix iou{{0.6, 0.9}, {0.7, 0.8}};
  const MatchResult m = MatchDetections(std::vector<double>{0.5, 0.4}, iou, 2, 0.5);
  ASSERT_EQ(m.pairs.size(), 2u);
  EXPECT_EQ(m.pairs[0].ground_truth, 1u);
  EXPECT_EQ(m.pairs[1].ground_truth, 0u);
}

TEST(MatchTest, MasksOnDifferentCanvasesThrow) {
  const std::vector<ScoredMask> dets{{RasterMask(8, 8), 0.5}};
  const std::vector<RasterMask> gts{RasterMask(8, 9)};
  EXPECT_THROW(MatchDetections(dets, gts, 0.5), InvalidInputError);
}

TEST(MatchTest, MaskOverloadComputesIou) {
  const std::vector<RasterMask> gts{Rect(10, 10, 0, 0, 3, 3)};
  const std::vector<ScoredMask> dets{{Rect(10, 10, 0, 0, 3, 1), 0.9}};
  const MatchResult m = MatchDetections(dets, gts, 0.5);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(m.pairs[0].iou, 0.5);
}

TEST(MatchTest, AgreesWithOracleOnRandomScenes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int scene = 0; scene < 500; ++scene) {
    const std::size_t dets = rng() % 11;
    const std::size_t gts = rng() % (11 - dets);
    std::vector<double> scores;
    IouMatrix iou(dets, std::vector<double>(gts));
    for (std::size_t d = 0; d < dets; ++d) {
      scores.push_back(std::round(unit(rng) * 8.0) / 8.0);
      for (auto& v : iou[d]) v = rng() % 3 == 0 ? 0.0 : unit(rng);
    }
    for (const double t : {0.0, 0.3, 0.5, 0.75}) {
      const OracleCounts want = OracleMatch(scores, iou, gts, t);
      const MatchResult got = MatchDetections(scores, iou, gts, t);
      ASSERT_EQ(got.tp, want.tp) << scene;
      ASSERT_EQ(got.fp, want.fp) << scene;
      ASSERT_EQ(got.fn, gts - want.tp + want.dup) << scene;
      ASSERT_EQ(got.pairs.size(), want.pairs.size());
      for (std::size_t i = 0; i < want.pairs.size(); ++i) {
        EXPECT_EQ(got.pairs[i].detection, want.pairs[i].first);
        EXPECT_EQ(got.pairs[i].ground_truth, want.pairs[i].second);
      }
      const MatchResult coco = MatchDetections(scores, iou, gts, t, DuplicatePolicy::kCoco);
      ASSERT_EQ(coco.fp, want.fp + want.dup);
      ASSERT_EQ(coco.fn, gts - want.tp);
    }
  }
}

TEST(PrecisionRecallTest, Examples) {
  MatchResult m;
  m.tp = 3;
  m.fp = 1;
  PrecisionRecall pr = ComputePrecisionRecall(m, 6);
  EXPECT_DOUBLE_EQ(pr.precision, 0.75);
  EXPECT_DOUBLE_EQ(pr.recall, 0.5);
  pr = ComputePrecisionRecall(MatchResult{}, 0);
  EXPECT_EQ(pr.precision, 0.0);
  EXPECT_EQ(pr.recall, 0.0);
  m.fp = 0;
  pr = ComputePrecisionRecall(m, 3);
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
}

TEST(PrCurveTest, WorkedExample) {
  const std::vector<ScoredOutcome> dets{{0.9, Outcome::kTruePositive},
                                        {0.8, Outcome::kFalsePositive},
                                        {0.7, Outcome::kTruePositive}};
  const PrCurve curve = BuildPrCurve(dets, 2);
  ASSERT_EQ(curve.points.size(), 3u);
  EXPECT_DOUBLE_EQ(curve.points[0].interpolated, 1.0);
  EXPECT_DOUBLE_EQ(curve.points[1].interpolated, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(curve.points[2].interpolated, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(curve.points[2].recall, 1.0);
  // 51 samples at recall <= 0.5, 50 above.
  double want = 0.0;
  for (int j = 0; j <= 100; ++j) want += j <= 50 ? 1.0 : 2.0 / 3.0;
  want /= 101.0;
  EXPECT_NEAR(AveragePrecision(curve), want, 1e-12);
  EXPECT_NEAR(AveragePrecision(curve), 0.8350, 1e-4);
}

TEST(PrCurveTest, SingleTruePositive) {
  const std::vector<ScoredOutcome> dets{{0.5, Outcome::kTruePositive}};
  const PrCurve curve = BuildPrCurve(dets, 4);
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_DOUBLE_EQ(curve.points[0].recall, 0.25);
  EXPECT_DOUBLE_EQ(curve.points[0].interpolated, 1.0);
  EXPECT_NEAR(AveragePrecision(curve), 26.0 / 101.0, 1e-12);
}

TEST(PrCurveTest, TiedScoresShareOnePoint) {
  const std::vector<ScoredOutcome> dets{{0.5, Outcome::kTruePositive},
                                        {0.5, Outcome::kFalsePositive}};
  const PrCurve curve = BuildPrCurve(dets, 1);
  ASSERT_EQ(curve.points.size(), 1u);
  EXPECT_DOUBLE_EQ(curve.points[0].precision, 0.5);
}

TEST(PrCurveTest, InterpolationIsNonIncreasing) {
  std::mt19937_64 rng(5);
  for (int scene = 0; scene < 500; ++scene) {
    const ApImage image = RandomScene(rng);
    const MatchResult m =
        MatchDetections(image.scores, image.iou, image.ground_truth_count, 0.5);
    std::vector<ScoredOutcome> scored;
    for (std::size_t i = 0; i < image.scores.size(); ++i) {
      scored.push_back({image.scores[i], m.outcomes[i]});
    }
    const PrCurve curve = BuildPrCurve(scored, image.ground_truth_count);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const PrPoint& p = curve.points[i];
      EXPECT_GE(p.recall, 0.0);
      EXPECT_LE(p.recall, 1.0);
      EXPECT_GE(p.precision, 0.0);
      EXPECT_LE(p.precision, 1.0);
      EXPECT_GE(p.interpolated, p.precision);
      if (i > 0) {
        EXPECT_GE(p.recall, curve.points[i - 1].recall);
        EXPECT_LE(p.interpolated, curve.points[i - 1].interpolated);
      }
    }
  }
}

TEST(AveragePrecisionTest, PerfectAndEmpty) {
  std::vector<RasterMask> gts{Rect(20, 20, 0, 0, 4, 4), Rect(20, 20, 10, 10, 15, 18)};
  std::vector<ScoredMask> dets{{gts[0], 0.9}, {gts[1], 0.3}};
  EXPECT_DOUBLE_EQ(AveragePrecision(ComputePrCurve(dets, gts, 0.5)), 1.0);
  const ApReport report = MeanAp(dets, gts, DefaultIouThresholds());
  EXPECT_DOUBLE_EQ(report.map, 1.0);
  EXPECT_EQ(AveragePrecision(ComputePrCurve({}, gts, 0.5)), 0.0);
  EXPECT_EQ(AveragePrecision(PrCurve{}), 0.0);
}

TEST(MeanApTest, DefaultThresholds) {
  const std::vector<double> t = DefaultIouThresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t.front(), 0.5);
  EXPECT_EQ(t.back(), 0.95);
}

TEST(MeanApTest, SingleThresholdEqualsAp50) {
  std::mt19937_64 rng(9);
  const ApImage image = RandomScene(rng);
  const std::vector<double> t{0.5};
  const ApReport r = MeanAp(std::span(&image, 1), t);
  ASSERT_TRUE(r.ap50.has_value());
  EXPECT_EQ(r.map, *r.ap50);
  EXPECT_FALSE(r.ap75.has_value());
}

TEST(MeanApTest, EmptyThresholdsThrow) {
  EXPECT_THROW(MeanAp(std::span<const ApImage>{}, std::vector<double>{}), InvalidInputError);
}

TEST(MeanApTest, MonotoneInThreshold) {
  for (const DuplicatePolicy policy : {DuplicatePolicy::kPaper, DuplicatePolicy::kCoco}) {
    std::mt19937_64 rng(21);
    for (int scene = 0; scene < 500; ++scene) {
      const ApImage image = RandomScene(rng);
      const ApReport r = MeanAp(std::span(&image, 1), DefaultIouThresholds(), policy);
      for (std::size_t i = 0; i < r.ap_by_threshold.size(); ++i) {
        const double ap = r.ap_by_threshold[i].second;
        EXPECT_GE(ap, 0.0);
        EXPECT_LE(ap, 1.0);
        if (i > 0) {
          EXPECT_LE(ap, r.ap_by_threshold[i - 1].second + 1e-12) << "scene " << scene;
        }
      }
      EXPECT_LE(r.map, *r.ap50 + 1e-12);
    }
  }
}

TEST(PercentageErrorTest, Examples) {
  EXPECT_DOUBLE_EQ(PercentageError(110, 100), 10.0);
  EXPECT_DOUBLE_EQ(PercentageError(7.5, 7.5), 0.0);
  EXPECT_DOUBLE_EQ(PercentageError(50, 200), -75.0);
  EXPECT_THROW(PercentageError(1, 0), InvalidInputError);
}

TEST(MapeTest, Examples) {
  EXPECT_DOUBLE_EQ(Mape(std::vector<double>{10, -20, 30}, 0, MapeMode::kStrict), 20.0);
  EXPECT_EQ(Mape(std::vector<double>{0}, 1, MapeMode::kStrict), 50.0);
  EXPECT_EQ(Mape(std::vector<double>{0}, 1, MapeMode::kLoose), 0.0);
  EXPECT_THROW(Mape({}, 0, MapeMode::kLoose), InvalidInputError);
  EXPECT_DOUBLE_EQ(Mape({}, 2, MapeMode::kStrict), 100.0);
}

TEST(MapeTest, StrictDominatesLoose) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> e(0.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> errors(rng() % 5);
    for (double& v : errors) v = e(rng);
    const std::size_t unmatched = rng() % 3;
    if (errors.empty() && unmatched == 0) continue;
    const double strict = Mape(errors, unmatched, MapeMode::kStrict);
    const double loose = Mape(errors, unmatched, MapeMode::kLoose);
    if (unmatched == 0) {
      EXPECT_EQ(strict, loose);
    } else {
      EXPECT_GT(strict, loose);
    }
  }
}

TEST(BoxTest, BoundingBoxAndIou) {
  EXPECT_FALSE(BoundingBox(RasterMask(5, 5)).has_value());
  RasterMask m(10, 10);
  m.set(2, 7);
  m.set(6, 3);
  EXPECT_EQ(*BoundingBox(m), (Box{2, 3, 6, 7}));
  EXPECT_DOUBLE_EQ(BoxIou({0, 0, 3, 3}, {0, 0, 3, 3}), 1.0);
  EXPECT_DOUBLE_EQ(BoxIou({0, 0, 3, 3}, {0, 0, 3, 1}), 0.5);
  EXPECT_DOUBLE_EQ(BoxIou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
}

TEST(HistogramTest, EqualWeightsMatchCounts) {
  const std::vector<double> v{1, 2, 2, 3, 4, 4, 4, 5};
  const std::vector<double> w(v.size(), 0.3);
  const Histogram h = WeightedHistogram(v, w, 4);
  EXPECT_EQ(h.lo, 1.0);
  EXPECT_EQ(h.hi, 5.0);
  const std::vector<double> counts{1, 2, 1, 4};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(h.Mass(i), counts[i] / 8.0, 1e-12);
}

TEST(HistogramTest, SingleWeightGivesUnitMass) {
  const std::vector<double> v{1, 2, 3, 9};
  const Histogram h = WeightedHistogram(v, std::vector<double>{0, 0, 1, 0}, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(h.Mass(i), i == 2 ? 1.0 : 0.0, 1e-12);
}

TEST(HistogramTest, IntegratesToOne) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng() % 50);
    std::vector<double> w(v.size());
    for (double& x : v) x = u(rng);
    for (double& x : w) x = u(rng) / 50.0;
    w[0] = 0.5;
    const Histogram h = WeightedHistogram(v, w, 1 + static_cast<int>(rng() % 30));
    double integral = 0.0;
    for (double d : h.density) {
      EXPECT_GE(d, 0.0);
      integral += d * h.bin_width();
    }
    EXPECT_NEAR(integral, 1.0, 1e-9);
  }
}

TEST(HistogramTest, InvalidInputs) {
  const std::vector<double> v{1, 2};
  EXPECT_THROW(WeightedHistogram(v, std::vector<double>{0, 0}, 4), InvalidInputError);
  EXPECT_THROW(WeightedHistogram(v, std::vector<double>{1}, 4), InvalidInputError);
  EXPECT_THROW(WeightedHistogram(v, std::vector<double>{1, -1}, 4), InvalidInputError);
  EXPECT_THROW(WeightedHistogram(v, std::vector<double>{1, 1}, 0), InvalidInputError);
}

Histogram TwoBins(double a, double b) { return Histogram{0.0, 2.0, {a, b}}; }

TEST(KlTest, SelfDivergenceIsZero) {
  const Histogram p = TwoBins(0.3, 0.7);
  EXPECT_EQ(KlDivergence(p, p), 0.0);
}

TEST(KlTest, TwoBinExample) {
  const double want = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  EXPECT_NEAR(KlDivergence(TwoBins(0.5, 0.5), TwoBins(0.25, 0.75)), want, 1e-15);
  EXPECT_NEAR(KlDivergence(TwoBins(0.5, 0.5), TwoBins(0.25, 0.75)), 0.1438, 1e-4);
}

TEST(KlTest, ZeroBinsAreSkipped) {
  const double want = 0.5 * std::log(0.5 / 0.25);
  EXPECT_NEAR(KlDivergence(TwoBins(0.5, 0.5), TwoBins(0.25, 0.0)), want, 1e-15);
}

TEST(KlTest, Errors) {
  EXPECT_THROW(KlDivergence(TwoBins(1, 0), Histogram{0.0, 3.0, {0.5, 0.5}}), InvalidInputError);
  EXPECT_THROW(KlDivergence(TwoBins(1, 0), Histogram{0.0, 2.0, {1.0}}), InvalidInputError);
  EXPECT_THROW(KlDivergence(TwoBins(1, 0), TwoBins(0, 1)), UndefinedResultError);
}

TEST(KlTest, NonNegativeWithoutExclusions) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Histogram p{0.0, 1.0, std::vector<double>(10)};
    Histogram q = p;
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      sp += p.density[i] = u(rng);
      sq += q.density[i] = u(rng);
    }
    for (std::size_t i = 0; i < 10; ++i) {
      p.density[i] *= 10.0 / sp;
      q.density[i] *= 10.0 / sq;
    }
    EXPECT_GE(KlDivergence(p, q), -1e-12);
  }
}

TEST(EvaluateTest, PredictionsEqualToTruth) {
  std::vector<PreparedImage> images;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    std::vector<TruthInstance> truths;
    std::vector<PredictedInstance> preds;
    for (int k = 0; k < 3; ++k) {
      const int x = 10 * k;
      const Fiber f{KeypointChain({{x + 1.0, 2.0}, {x + 2.0, 20.0}}), 4.0 + k + i,
                    18.0 + 3 * k};
      const RasterMask m = Rect(40, 40, x, 0, x + 5, 20 + k);
      truths.push_back({f, m});
      preds.push_back({f, m, 1.0});
    }
    images.push_back(PrepareImage(truths, preds));
  }
  const EvaluationReport r = Evaluate(images, {});
  EXPECT_EQ(r.truth_count, 15u);
  EXPECT_EQ(r.matched_count, 15u);
  EXPECT_DOUBLE_EQ(r.ap.map, 1.0);
  EXPECT_EQ(*r.width.mape_strict, 0.0);
  EXPECT_EQ(*r.length.mape_loose, 0.0);
  EXPECT_EQ(*r.width.kl, 0.0);
  EXPECT_EQ(*r.length.kl, 0.0);
}

TEST(EvaluateTest, UnmatchedPredictionCountsInStrictMape) {
  const Fiber f{KeypointChain({{1.0, 1.0}, {1.0, 9.0}}), 4.0, 10.0};
  const std::vector<TruthInstance> truths{{f, Rect(40, 40, 0, 0, 4, 9)}};
  const Fiber g{KeypointChain({{30.0, 30.0}, {30.0, 38.0}}), 5.0, 12.0};
  const std::vector<PredictedInstance> preds{{f, Rect(40, 40, 0, 0, 4, 9), 0.9},
                                             {g, Rect(40, 40, 28, 28, 32, 38), 0.8}};
  const std::vector<PreparedImage> images{PrepareImage(truths, preds)};
  const EvaluationReport r = Evaluate(images, {});
  EXPECT_EQ(r.matched_count, 1u);
  EXPECT_DOUBLE_EQ(*r.width.mape_strict, 50.0);
  EXPECT_DOUBLE_EQ(*r.width.mape_loose, 0.0);
}

}  // namespace
}  // namespace fiberlab
