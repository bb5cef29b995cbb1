#ifndef KNEESEG_LABELS_HPP
#define KNEESEG_LABELS_HPP

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "kneeseg/detection.hpp"

namespace kneeseg {

/// Label ids of one bone and the structures attached to it.
struct BoneLabels {
  Bone bone;
  int bone_class;
  int cartilage_class;
  int lesion_class;
};

/// Ten-class knee scheme: 0 background, FB FC TB TC PB PC, then the femoral,
/// tibial and patellar lesion classes.
struct LabelScheme {
  int num_classes = 10;
  std::vector<std::string> class_names;
  std::vector<BoneLabels> bones;

  static LabelScheme knee() {
    LabelScheme s;
    s.num_classes = 10;
    s.class_names = {"background",        "femoral_bone",   "femoral_cartilage", "tibial_bone",
                     "tibial_cartilage",  "patellar_bone",  "patellar_cartilage", "femoral_lesion",
                     "tibial_lesion",     "patellar_lesion"};
    s.bones = {{Bone::Femur, 1, 2, 7}, {Bone::Tibia, 3, 4, 8}, {Bone::Patella, 5, 6, 9}};
    return s;
  }

  /// Bone and cartilage classes, ascending: the classes scored by DSC/ASD/HD.
  std::vector<int> structure_classes() const {
    std::vector<int> out;
    for (const auto& b : bones) {
      out.push_back(b.bone_class);
      out.push_back(b.cartilage_class);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::string name(int cls) const {
    if (cls >= 0 && static_cast<std::size_t>(cls) < class_names.size()) return class_names[cls];
    return "class_" + std::to_string(cls);
  }
};

}  // namespace kneeseg

#endif  // KNEESEG_LABELS_HPP
