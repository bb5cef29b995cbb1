#ifndef KNEESEG_BATCH_MANIFEST_HPP
#define KNEESEG_BATCH_MANIFEST_HPP

// Manifest: the list of cases a batch command runs over. JSON, with file
// paths relative to the manifest's own directory.
//
//   {
//     "label_scheme": { "num_classes": 10, "class_names": [...],
//                       "bones": [{"bone": "femur", "bone_class": 1,
//                                  "cartilage_class": 2, "lesion_class": 7}, ...] },
//     "cases": [
//       { "case_id": "c000", "image": "c000/image.mha",
//         "ground_truth": "c000/labels.mha",
//         "predictions": { "unet": "c000/unet.mha" },
//         "probabilities": { "unet": { "7": "c000/unet_p7.mha", ... } },
//         "reconstruction": "c000/recon.mha", "grade": 2 }
//     ]
//   }
//
// "label_scheme" is optional (defaults to the ten-class knee scheme). A case
// may give a single "prediction" instead of "predictions"; its model is then
// called "default".

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kneeseg/grid.hpp"
#include "kneeseg/labels.hpp"

namespace kneeseg::batch {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct CaseRecord {
  std::string case_id;
  std::optional<fs::path> image;
  fs::path ground_truth;
  std::map<std::string, fs::path> predictions;                       // model -> label map
  std::map<std::string, std::map<int, fs::path>> probabilities;      // model -> class -> map
  std::optional<fs::path> reconstruction;
  std::optional<int> grade;  // radiographic osteoarthritis grade 0-4
};

struct Manifest {
  LabelScheme scheme = LabelScheme::knee();
  std::vector<CaseRecord> cases;  // sorted by case_id

  std::vector<std::string> models() const {
    std::set<std::string> names;
    for (const auto& c : cases)
      for (const auto& [m, p] : c.predictions) names.insert(m);
    return {names.begin(), names.end()};
  }
};

inline Bone bone_from_string(const std::string& s) {
  if (s == "femur") return Bone::Femur;
  if (s == "tibia") return Bone::Tibia;
  if (s == "patella") return Bone::Patella;
  throw Error("manifest: unknown bone '" + s + "'");
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline LabelScheme parse_label_scheme(const json& j) {
  LabelScheme s;
  s.num_classes = j.at("num_classes").get<int>();
  if (s.num_classes < 2 || s.num_classes > 256) throw Error("manifest: invalid num_classes");
  if (j.contains("class_names")) s.class_names = j["class_names"].get<std::vector<std::string>>();
  for (const auto& b : j.value("bones", json::array())) {
    BoneLabels bl{bone_from_string(b.at("bone").get<std::string>()), b.at("bone_class").get<int>(),
                  b.at("cartilage_class").get<int>(), b.at("lesion_class").get<int>()};
    for (int c : {bl.bone_class, bl.cartilage_class, bl.lesion_class})
      if (c < 1 || c >= s.num_classes) throw Error("manifest: bone class id out of range");
    s.bones.push_back(bl);
  }
  return s;
}

/// Parses and validates: unique non-empty case ids, every referenced file
/// present. Cases come back sorted by case_id.
inline Manifest parse_manifest(const json& j, const fs::path& base_dir) {
  Manifest m;
  if (j.contains("label_scheme")) m.scheme = parse_label_scheme(j["label_scheme"]);
  if (!j.contains("cases") || !j["cases"].is_array()) throw Error("manifest: missing 'cases' array");

  auto resolve = [&](const json& v) {
    const fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  std::set<std::string> ids;
  for (const auto& c : j["cases"]) {
    CaseRecord r;
    r.case_id = c.at("case_id").get<std::string>();
    if (r.case_id.empty()) throw Error("manifest: empty case_id");
    if (!ids.insert(r.case_id).second) throw Error("manifest: duplicate case_id '" + r.case_id + "'");
    r.ground_truth = resolve(c.at("ground_truth"));
    if (c.contains("image")) r.image = resolve(c["image"]);
    if (c.contains("prediction")) r.predictions["default"] = resolve(c["prediction"]);
    if (c.contains("predictions"))
      for (const auto& [model, p] : c["predictions"].items()) r.predictions[model] = resolve(p);
    if (c.contains("probabilities"))
      for (const auto& [model, chans] : c["probabilities"].items())
        for (const auto& [cls, p] : chans.items()) r.probabilities[model][std::stoi(cls)] = resolve(p);
    if (c.contains("reconstruction")) r.reconstruction = resolve(c["reconstruction"]);
    if (c.contains("grade") && !c["grade"].is_null()) {
      const int g = c["grade"].get<int>();
      if (g < 0 || g > 4) throw Error("manifest: grade must be 0-4 for case " + r.case_id);
      r.grade = g;
    }

    std::vector<fs::path> files{r.ground_truth};
    if (r.image) files.push_back(*r.image);
    if (r.reconstruction) files.push_back(*r.reconstruction);
    for (const auto& [mdl, p] : r.predictions) files.push_back(p);
    for (const auto& [mdl, chans] : r.probabilities)
      for (const auto& [cls, p] : chans) files.push_back(p);
    for (const auto& f : files)
      if (!fs::exists(f)) throw Error("manifest: case " + r.case_id + " references missing file " + f.string());
    m.cases.push_back(std::move(r));
  }
  std::sort(m.cases.begin(), m.cases.end(),
            [](const CaseRecord& a, const CaseRecord& b) { return a.case_id < b.case_id; });
  return m;
}

inline Manifest load_manifest(const fs::path& path) {
  try {
    return parse_manifest(read_json_file(path), path.parent_path());
  } catch (const json::exception& e) {
    throw Error("manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace kneeseg::batch

#endif  // KNEESEG_BATCH_MANIFEST_HPP
