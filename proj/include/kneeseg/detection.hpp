#ifndef KNEESEG_DETECTION_HPP
#define KNEESEG_DETECTION_HPP

// Bone-wise lesion detection: each (case, bone) pair is one positive or
// negative case, scored against the DSC >= 5% criterion; threshold sweeps
// trace out an ROC curve.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kneeseg/components.hpp"
#include "kneeseg/grid.hpp"
#include "kneeseg/metrics.hpp"

namespace kneeseg {

enum class Bone { Femur, Tibia, Patella };
enum class DetectionStatus { TP, FP, TN, FN };

inline const char* to_string(Bone b) {
  switch (b) {
    case Bone::Femur: return "femur";
    case Bone::Tibia: return "tibia";
    case Bone::Patella: return "patella";
  }
  return "?";
}

inline const char* to_string(DetectionStatus s) {
  switch (s) {
    case DetectionStatus::TP: return "TP";
    case DetectionStatus::FP: return "FP";
    case DetectionStatus::TN: return "TN";
    case DetectionStatus::FN: return "FN";
  }
  return "?";
}

constexpr double kDetectionDsc = 0.05;

struct DetectionOutcome {
  std::string case_id;
  Bone bone = Bone::Femur;
  DetectionStatus status = DetectionStatus::TN;
  std::optional<double> dsc;  // set iff the ground truth has a lesion
};

inline DetectionOutcome classify_bone(const BinaryMask& pred_lesion, const BinaryMask& gt_lesion) {
  require_same_geometry(pred_lesion.geometry(), gt_lesion.geometry(), "classify_bone");
  DetectionOutcome o;
  if (count(gt_lesion) > 0) {
    o.dsc = dsc(pred_lesion, gt_lesion);
    o.status = *o.dsc >= kDetectionDsc ? DetectionStatus::TP : DetectionStatus::FN;
  } else {
    o.status = count(pred_lesion) == 0 ? DetectionStatus::TN : DetectionStatus::FP;
  }
  return o;
}

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(DetectionStatus s) {
    switch (s) {
      case DetectionStatus::TP: ++tp; break;
      case DetectionStatus::FP: ++fp; break;
      case DetectionStatus::TN: ++tn; break;
      case DetectionStatus::FN: ++fn; break;
    }
  }
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  std::size_t predicted_positive() const { return tp + fp; }
  std::size_t total() const { return tp + fp + tn + fn; }
};

struct DetectionSummary {
  ConfusionCounts counts;
  double accuracy = 0.0;
  std::optional<double> tpr;
  std::optional<double> tnr;
  std::optional<double> mean_dsc;  // over positive cases
  std::map<Bone, ConfusionCounts> per_bone;
};

inline DetectionSummary detection_report(const std::vector<DetectionOutcome>& outcomes) {
  if (outcomes.empty()) throw Error("detection_report: no outcomes");
  DetectionSummary s;
  double dsc_sum = 0.0;
  std::size_t dsc_n = 0;
  for (const auto& o : outcomes) {
    s.counts.add(o.status);
    s.per_bone[o.bone].add(o.status);
    if (o.dsc) {
      dsc_sum += *o.dsc;
      ++dsc_n;
    }
  }
  const auto& c = s.counts;
  s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.positives()) s.tpr = static_cast<double>(c.tp) / static_cast<double>(c.positives());
  if (c.negatives()) s.tnr = static_cast<double>(c.tn) / static_cast<double>(c.negatives());
  if (dsc_n) s.mean_dsc = dsc_sum / static_cast<double>(dsc_n);
  return s;
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double size_threshold_mm3 = 0.0;
  std::optional<double> prob_threshold;
  ConfusionCounts counts;
};

/// Trapezoidal area over the points plus (0,0) and (1,1), sorted by fpr then tpr.
inline double roc_auc(std::vector<std::pair<double, double>> pts) {
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  return area;
}

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by fpr, then tpr
  double auc = 0.0;
};

inline RocCurve make_roc(std::vector<RocPoint> pts) {
  std::stable_sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : pts) xy.emplace_back(p.fpr, p.tpr);
  return {std::move(pts), roc_auc(std::move(xy))};
}

inline std::vector<double> default_size_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 12; ++i) t.push_back(0.5 * i);
  return t;
}

inline std::vector<double> default_prob_thresholds() {
  std::vector<double> t;
  for (int i = 5; i <= 10; ++i) t.push_back(i / 10.0);
  return t;
}

/// One bone of one case: predicted and reference lesion masks plus, for the
/// probability sweep, the softmax channel of that bone's lesion class.
struct BoneCase {
  std::string case_id;
  Bone bone = Bone::Femur;
  BinaryMask pred;
  BinaryMask gt;
  std::optional<Volume> prob;
};

struct SweepStep {
  double size_threshold_mm3 = 0.0;
  std::optional<double> prob_threshold;
  std::vector<DetectionOutcome> outcomes;
  ConfusionCounts counts;
};

/// Prediction mask for one sweep step: optional probability cut first, then
/// the size filter.
inline BinaryMask threshold_prediction(const BoneCase& c, double size_mm3,
                                       std::optional<double> prob, Connectivity conn) {
  BinaryMask p = c.pred;
  if (prob) {
    if (!c.prob) throw Error("sweep_detection: case " + c.case_id + " has no probability map");
    require_same_geometry(p.geometry(), c.prob->geometry(), "sweep_detection");
    for (std::size_t i = 0; i < p.size(); ++i)
      if ((*c.prob)[i] < *prob) p[i] = 0;
  }
  return remove_small_components(p, size_mm3, conn);
}

inline SweepStep run_sweep_step(const std::vector<BoneCase>& cases, double size_mm3,
                                std::optional<double> prob, Connectivity conn) {
  SweepStep step{size_mm3, prob, {}, {}};
  for (const auto& c : cases) {
    // References get the same size filter as predictions.
    const BinaryMask gt = remove_small_components(c.gt, size_mm3, conn);
    DetectionOutcome o = classify_bone(threshold_prediction(c, size_mm3, prob, conn), gt);
    o.case_id = c.case_id;
    o.bone = c.bone;
    step.counts.add(o.status);
    step.outcomes.push_back(std::move(o));
  }
  return step;
}

struct SweepResult {
  std::vector<SweepStep> steps;
  RocCurve roc;
};

/// ROC from sweep steps; throws when a step has no positive or no negative cases.
inline RocCurve roc_from_steps(const std::vector<SweepStep>& steps) {
  std::vector<RocPoint> pts;
  for (const auto& st : steps) {
    const auto& c = st.counts;
    if (c.positives() == 0 || c.negatives() == 0)
      throw Error("sweep_detection: degenerate ROC at size threshold " +
                  std::to_string(st.size_threshold_mm3) + " (positives=" +
                  std::to_string(c.positives()) + ", negatives=" + std::to_string(c.negatives()) +
                  ")");
    pts.push_back({static_cast<double>(c.fp) / static_cast<double>(c.negatives()),
                   static_cast<double>(c.tp) / static_cast<double>(c.positives()),
                   st.size_threshold_mm3, st.prob_threshold, c});
  }
  return make_roc(std::move(pts));
}

/// (size, probability) pairs visited by a sweep: every size threshold alone,
/// then the probability thresholds at the last size threshold.
inline std::vector<std::pair<double, std::optional<double>>> sweep_schedule(
    const std::vector<double>& size_thresholds, const std::vector<double>& prob_thresholds,
    bool with_prob) {
  if (size_thresholds.empty()) throw Error("sweep_detection: no size thresholds");
  std::vector<std::pair<double, std::optional<double>>> out;
  for (double s : size_thresholds) out.emplace_back(s, std::nullopt);
  if (with_prob)
    for (double p : prob_thresholds) out.emplace_back(size_thresholds.back(), p);
  return out;
}

inline bool all_have_probability(const std::vector<BoneCase>& cases) {
  return std::all_of(cases.begin(), cases.end(), [](const BoneCase& c) { return c.prob.has_value(); });
}

/// Size sweep over `size_thresholds`; then, with the size threshold fixed at
/// the last value, a probability sweep when every case carries a map.
inline SweepResult sweep_detection(const std::vector<BoneCase>& cases,
                                   const std::vector<double>& size_thresholds,
                                   const std::vector<double>& prob_thresholds,
                                   Connectivity conn = Connectivity::Vertex) {
  if (cases.empty()) throw Error("sweep_detection: no cases");
  SweepResult r;
  for (const auto& [s, p] : sweep_schedule(size_thresholds, prob_thresholds, all_have_probability(cases)))
    r.steps.push_back(run_sweep_step(cases, s, p, conn));
  r.roc = roc_from_steps(r.steps);
  return r;
}

}  // namespace kneeseg

#endif  // KNEESEG_DETECTION_HPP
