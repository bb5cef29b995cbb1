#ifndef KNEESEG_BATCH_CONFIG_HPP
#define KNEESEG_BATCH_CONFIG_HPP

// Run configuration. Every field is optional in the JSON file; defaults are
// the standard pipeline constants.
//
//   {
//     "loss": { "alpha": 10, "beta": 99, "class_weights": [...],
//               "dilation_radius_voxels": 50, "fill_value": 0 },
//     "masking_bone_classes": [1, 3],
//     "normalize": true,
//     "postprocess": { "enabled": true, "allowance_voxels": 50,
//                      "connectivity": 26, "distance": "euclidean" },
//     "detection": { "size_thresholds": [0, 0.5, ..., 6],
//                    "prob_thresholds": [0.5, ..., 1.0], "connectivity": 26 },
//     "significance_alpha": 0.05,
//     "phantom": { "dims": [64, 128, 128], "spacing": [...], "seed": 0,
//                  "lesion_count": [2, 2, 1], "lesion_radius_mm": [1, 2.5],
//                  "lesion_intensity_delta": 0.35, "noise_sigma": 0.02,
//                  "lesion_free_rate": 0.4, "cases": 1 },
//     "prediction": { "stray_class": 1, "stray_count": 0,
//                     "stray_min_distance_voxels": 60, "lesion_miss_rate": 0.1,
//                     "false_lesion_rate": 0.2 },
//     "augment": { "scale_range": [0.9, 1.1], "rotation_deg_max": 10,
//                  "translation_vox_max": 10, "seed": 0 }
//   }

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kneeseg/augment.hpp"
#include "kneeseg/batch/manifest.hpp"
#include "kneeseg/components.hpp"
#include "kneeseg/detection.hpp"
#include "kneeseg/losses.hpp"
#include "kneeseg/phantom.hpp"

namespace kneeseg::batch {

struct RunConfig {
  LossConfig loss;
  std::vector<int> masking_bone_classes{1, 3};
  bool normalize = true;

  bool postprocess = true;
  double allowance_voxels = 50.0;
  Connectivity postprocess_connectivity = Connectivity::Vertex;
  GapMetric gap_metric = GapMetric::Euclidean;

  std::vector<double> size_thresholds = default_size_thresholds();
  std::vector<double> prob_thresholds = default_prob_thresholds();
  Connectivity detection_connectivity = Connectivity::Vertex;

  double significance_alpha = 0.05;

  // Batch phantoms mix lesion-free bones, missed lesions and false spots so
  // that the generated manifests exercise both detection classes.
  PhantomConfig phantom = [] {
    PhantomConfig p;
    p.lesion_free_rate = 0.4;
    return p;
  }();
  std::size_t phantom_cases = 1;
  PredictionConfig prediction = [] {
    PredictionConfig p;
    p.lesion_miss_rate = 0.1;
    p.false_lesion_rate = 0.2;
    return p;
  }();
  AugmentConfig augment;
};

inline GapMetric gap_metric_from_string(const std::string& s) {
  if (s == "euclidean") return GapMetric::Euclidean;
  if (s == "chebyshev") return GapMetric::Chebyshev;
  throw Error("config: distance must be 'euclidean' or 'chebyshev'");
}

inline RunConfig parse_config(const json& j) {
  RunConfig c;
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    c.loss.alpha = l.value("alpha", c.loss.alpha);
    c.loss.beta = l.value("beta", c.loss.beta);
    c.loss.class_weights = l.value("class_weights", c.loss.class_weights);
    c.loss.dilation_radius_voxels = l.value("dilation_radius_voxels", c.loss.dilation_radius_voxels);
    c.loss.fill_value = l.value("fill_value", c.loss.fill_value);
    c.loss.validate();
  }
  c.masking_bone_classes = j.value("masking_bone_classes", c.masking_bone_classes);
  c.normalize = j.value("normalize", c.normalize);
  if (j.contains("postprocess")) {
    const auto& p = j["postprocess"];
    c.postprocess = p.value("enabled", c.postprocess);
    c.allowance_voxels = p.value("allowance_voxels", c.allowance_voxels);
    c.postprocess_connectivity = connectivity_from_int(p.value("connectivity", 26));
    c.gap_metric = gap_metric_from_string(p.value("distance", std::string("euclidean")));
  }
  if (j.contains("detection")) {
    const auto& d = j["detection"];
    c.size_thresholds = d.value("size_thresholds", c.size_thresholds);
    c.prob_thresholds = d.value("prob_thresholds", c.prob_thresholds);
    c.detection_connectivity = connectivity_from_int(d.value("connectivity", 26));
  }
  c.significance_alpha = j.value("significance_alpha", c.significance_alpha);
  if (j.contains("phantom")) {
    const auto& p = j["phantom"];
    c.phantom.dims = p.value("dims", c.phantom.dims);
    c.phantom.spacing = p.value("spacing", c.phantom.spacing);
    c.phantom.seed = p.value("seed", c.phantom.seed);
    c.phantom.lesion_count = p.value("lesion_count", c.phantom.lesion_count);
    c.phantom.lesion_radius_mm = p.value("lesion_radius_mm", c.phantom.lesion_radius_mm);
    c.phantom.lesion_intensity_delta = p.value("lesion_intensity_delta", c.phantom.lesion_intensity_delta);
    c.phantom.noise_sigma = p.value("noise_sigma", c.phantom.noise_sigma);
    c.phantom.lesion_free_rate = p.value("lesion_free_rate", c.phantom.lesion_free_rate);
    c.phantom_cases = p.value("cases", c.phantom_cases);
  }
  if (j.contains("prediction")) {
    const auto& p = j["prediction"];
    c.prediction.stray_class = p.value("stray_class", c.prediction.stray_class);
    c.prediction.stray_count = p.value("stray_count", c.prediction.stray_count);
    c.prediction.stray_min_distance_voxels = p.value("stray_min_distance_voxels", c.prediction.stray_min_distance_voxels);
    c.prediction.lesion_miss_rate = p.value("lesion_miss_rate", c.prediction.lesion_miss_rate);
    c.prediction.false_lesion_rate = p.value("false_lesion_rate", c.prediction.false_lesion_rate);
    c.prediction.false_lesion_radius_voxels = p.value("false_lesion_radius_voxels", c.prediction.false_lesion_radius_voxels);
  }
  if (j.contains("augment")) {
    const auto& a = j["augment"];
    c.augment.scale_range = a.value("scale_range", c.augment.scale_range);
    c.augment.rotation_deg_max = a.value("rotation_deg_max", c.augment.rotation_deg_max);
    c.augment.translation_vox_max = a.value("translation_vox_max", c.augment.translation_vox_max);
    c.augment.seed = a.value("seed", c.augment.seed);
    c.augment.validate();
  }
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  try {
    return parse_config(read_json_file(path));
  } catch (const json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
}

}  // namespace kneeseg::batch

#endif  // KNEESEG_BATCH_CONFIG_HPP
