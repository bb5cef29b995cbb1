#include <gtest/gtest.h>

#include "kneeseg/detection.hpp"
#include "support.hpp"

using namespace kneeseg;
using kneeseg::test::geom;

namespace {

BinaryMask line_mask(const Geometry& g, std::size_t from, std::size_t n) {
  BinaryMask m(g);
  for (std::size_t i = from; i < from + n; ++i) m[i] = 1;
  return m;
}

DetectionOutcome outcome(DetectionStatus s, Bone b = Bone::Femur) {
  DetectionOutcome o;
  o.status = s;
  o.bone = b;
  if (s == DetectionStatus::TP) o.dsc = 0.8;
  if (s == DetectionStatus::FN) o.dsc = 0.0;
  return o;
}

}  // namespace

TEST(ClassifyBone, FivePercentBoundaryIsTruePositive) {
  const Geometry g = geom(1, 1, 64);
  const BinaryMask gt = line_mask(g, 0, 10), pred = line_mask(g, 9, 30);
  const DetectionOutcome o = classify_bone(pred, gt);
  EXPECT_EQ(*o.dsc, 0.05);
  EXPECT_EQ(o.status, DetectionStatus::TP);
  // One voxel more in the prediction drops DSC below 5%.
  EXPECT_EQ(classify_bone(line_mask(g, 9, 31), gt).status, DetectionStatus::FN);
}

TEST(ClassifyBone, NegativeAndMissedCases) {
  const Geometry g = geom(1, 1, 8);
  const BinaryMask empty(g);
  EXPECT_EQ(classify_bone(empty, empty).status, DetectionStatus::TN);
  EXPECT_FALSE(classify_bone(empty, empty).dsc.has_value());
  EXPECT_EQ(classify_bone(line_mask(g, 0, 1), empty).status, DetectionStatus::FP);
  const DetectionOutcome fn = classify_bone(empty, line_mask(g, 0, 2));
  EXPECT_EQ(fn.status, DetectionStatus::FN);
  EXPECT_EQ(*fn.dsc, 0.0);
}

TEST(DetectionReport, PerfectAndInverted) {
  const auto good = detection_report({outcome(DetectionStatus::TP), outcome(DetectionStatus::TN)});
  EXPECT_EQ(good.accuracy, 1.0);
  EXPECT_EQ(*good.tpr, 1.0);
  EXPECT_EQ(*good.tnr, 1.0);
  const auto bad = detection_report({outcome(DetectionStatus::FP), outcome(DetectionStatus::FN)});
  EXPECT_EQ(bad.accuracy, 0.0);
  EXPECT_EQ(*bad.tpr, 0.0);
  EXPECT_EQ(*bad.tnr, 0.0);
  EXPECT_THROW(detection_report({}), Error);
}

TEST(DetectionReport, UndefinedRatesAndPerBone) {
  const auto r = detection_report({outcome(DetectionStatus::TN, Bone::Femur), outcome(DetectionStatus::FP, Bone::Tibia)});
  EXPECT_FALSE(r.tpr.has_value());
  EXPECT_FALSE(r.mean_dsc.has_value());
  EXPECT_DOUBLE_EQ(*r.tnr, 0.5);
  EXPECT_EQ(r.per_bone.at(Bone::Tibia).fp, 1u);
  EXPECT_EQ(r.per_bone.at(Bone::Femur).tn, 1u);
}

TEST(Roc, PerfectAndDiagonal) {
  EXPECT_EQ(roc_auc({{0.0, 1.0}, {0.0, 1.0}}), 1.0);
  std::vector<std::pair<double, double>> diag;
  for (int i = 0; i <= 10; ++i) diag.emplace_back(i / 10.0, i / 10.0);
  EXPECT_NEAR(roc_auc(diag), 0.5, 1e-12);
  EXPECT_NEAR(roc_auc({}), 0.5, 1e-15);
  // A single interior point: area of the two trapezoids.
  EXPECT_NEAR(roc_auc({{0.2, 0.6}}), 0.2 * 0.3 + 0.8 * 0.8, 1e-15);
}

TEST(Roc, PointsSortedByFprThenTpr) {
  std::vector<RocPoint> pts(3);
  pts[0].fpr = 0.5;
  pts[0].tpr = 0.9;
  pts[1].fpr = 0.1;
  pts[1].tpr = 0.7;
  pts[2].fpr = 0.1;
  pts[2].tpr = 0.3;
  const RocCurve c = make_roc(pts);
  EXPECT_EQ(c.points[0].tpr, 0.3);
  EXPECT_EQ(c.points[1].tpr, 0.7);
  EXPECT_EQ(c.points[2].fpr, 0.5);
}

TEST(Schedules, DefaultGrids) {
  const auto s = default_size_thresholds();
  ASSERT_EQ(s.size(), 13u);
  EXPECT_EQ(s.front(), 0.0);
  EXPECT_EQ(s[1], 0.5);
  EXPECT_EQ(s.back(), 6.0);
  const auto p = default_prob_thresholds();
  ASSERT_EQ(p.size(), 6u);
  EXPECT_DOUBLE_EQ(p.front(), 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.6);
  EXPECT_EQ(p.back(), 1.0);
}

namespace {

/// Random lesion masks: a mix of positives, negatives, false spots and misses.
std::vector<BoneCase> random_cases(int n, std::uint64_t seed, bool with_prob) {
  CounterRng rng(seed, Stream::Test);
  const Geometry g = geom(8, 10, 10);
  std::vector<BoneCase> out;
  for (int i = 0; i < n; ++i) {
    BoneCase c{"c" + std::to_string(i), static_cast<Bone>(i % 3), BinaryMask(g), BinaryMask(g), std::nullopt};
    if (rng.uniform() < 0.5) c.gt = test::random_mask(g, rng, 0.0);
    for (std::size_t v = 0; v < c.gt.size(); ++v) c.pred[v] = c.gt[v] && rng.uniform() < 0.8;
    for (std::size_t v = 0; v < c.pred.size(); ++v)
      if (rng.uniform() < 0.01) c.pred[v] = 1;
    if (with_prob) {
      Volume p(g);
      for (std::size_t v = 0; v < p.size(); ++v) p[v] = static_cast<float>(c.pred[v] ? 0.5 + 0.5 * rng.uniform() : 0.0);
      c.prob = std::move(p);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

TEST(Sweep, PredictedPositivesNonIncreasingWithSize) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto cases = random_cases(30, seed, false);
    const auto r = sweep_detection(cases, default_size_thresholds(), {});
    ASSERT_EQ(r.steps.size(), 13u);
    for (std::size_t i = 1; i < r.steps.size(); ++i)
      EXPECT_LE(r.steps[i].counts.predicted_positive(), r.steps[i - 1].counts.predicted_positive());
  }
}

TEST(Sweep, ZeroThresholdEqualsUnfilteredClassification) {
  const auto cases = random_cases(20, 9, false);
  const SweepStep s = run_sweep_step(cases, 0.0, std::nullopt, Connectivity::Vertex);
  for (std::size_t i = 0; i < cases.size(); ++i)
    EXPECT_EQ(s.outcomes[i].status, classify_bone(cases[i].pred, cases[i].gt).status);
}

TEST(Sweep, ReferenceIsFilteredWithPrediction) {
  // A 1-voxel reference lesion disappears at 2 mm^3 and the case becomes negative.
  const Geometry g = geom(4, 4, 4);
  BoneCase c{"a", Bone::Tibia, BinaryMask(g), BinaryMask(g), std::nullopt};
  c.gt[5] = 1;
  c.pred[5] = 1;
  EXPECT_EQ(run_sweep_step({c}, 0.0, std::nullopt, Connectivity::Vertex).outcomes[0].status, DetectionStatus::TP);
  EXPECT_EQ(run_sweep_step({c}, 2.0, std::nullopt, Connectivity::Vertex).outcomes[0].status, DetectionStatus::TN);
}

TEST(Sweep, ProbabilityStepsFollowSizeSweep) {
  const auto cases = random_cases(24, 3, true);
  const auto r = sweep_detection(cases, {0.0, 2.0}, {0.5, 0.75, 1.0});
  ASSERT_EQ(r.steps.size(), 5u);
  EXPECT_FALSE(r.steps[1].prob_threshold.has_value());
  EXPECT_EQ(*r.steps[2].prob_threshold, 0.5);
  EXPECT_EQ(r.steps[4].size_threshold_mm3, 2.0);
  for (std::size_t i = 3; i < r.steps.size(); ++i)
    EXPECT_LE(r.steps[i].counts.predicted_positive(), r.steps[i - 1].counts.predicted_positive());
  EXPECT_EQ(r.roc.points.size(), 5u);
  EXPECT_GE(r.roc.auc, 0.0);
  EXPECT_LE(r.roc.auc, 1.0);
}

TEST(Sweep, ProbabilityCutNeedsMaps) {
  const auto cases = random_cases(4, 1, false);
  EXPECT_THROW(run_sweep_step(cases, 0.0, 0.5, Connectivity::Vertex), Error);
  // Without maps the probability stage is skipped entirely.
  EXPECT_EQ(sweep_detection(random_cases(30, 2, false), {0.0}, {0.5}).steps.size(), 1u);
}

TEST(Sweep, DegenerateRocIsAnError) {
  const Geometry g = geom(2, 2, 2);
  std::vector<BoneCase> negatives{{"n", Bone::Femur, BinaryMask(g), BinaryMask(g), std::nullopt}};
  EXPECT_THROW(sweep_detection(negatives, {0.0}, {}), Error);
  EXPECT_THROW(sweep_detection({}, {0.0}, {}), Error);
}

TEST(Sweep, PerfectClassifierHasUnitAuc) {
  auto cases = random_cases(30, 4, false);
  for (auto& c : cases) c.pred = c.gt;
  const auto r = sweep_detection(cases, {0.0}, {});
  EXPECT_EQ(r.roc.auc, 1.0);
}
