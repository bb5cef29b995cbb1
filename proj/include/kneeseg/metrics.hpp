#ifndef KNEESEG_METRICS_HPP
#define KNEESEG_METRICS_HPP

// Overlap and surface-distance metrics. Surfaces are the 6-connected boundary
// voxels of each mask (voxels outside the array count as background) and
// distances are measured between voxel centers in mm.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kneeseg/components.hpp"
#include "kneeseg/distance.hpp"
#include "kneeseg/grid.hpp"
#include "kneeseg/region.hpp"

namespace kneeseg {

/// 2|A n B| / (|A| + |B|); 1.0 when both are empty.
inline double dsc(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a.geometry(), b.geometry(), "dsc");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool ai = a[i] != 0, bi = b[i] != 0;
    na += ai;
    nb += bi;
    both += ai && bi;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

/// Foreground voxels with at least one background face neighbor.
inline BinaryMask boundary_mask(const BinaryMask& m) {
  BinaryMask out(m.geometry());
  const auto& d = m.dims();
  const std::size_t sy = d[2], sz = d[1] * d[2];
  std::size_t i = 0;
  for (std::size_t z = 0; z < d[0]; ++z)
    for (std::size_t y = 0; y < d[1]; ++y)
      for (std::size_t x = 0; x < d[2]; ++x, ++i) {
        if (!m[i]) continue;
        const bool interior = z > 0 && z + 1 < d[0] && y > 0 && y + 1 < d[1] && x > 0 &&
                              x + 1 < d[2] && m[i - 1] && m[i + 1] && m[i - sy] && m[i + sy] &&
                              m[i - sz] && m[i + sz];
        out[i] = !interior;
      }
  return out;
}

struct BoundarySet {
  std::vector<std::array<double, 3>> points_mm;  // (z, y, x) physical coordinates
  std::size_t size() const { return points_mm.size(); }
};

inline BoundarySet extract_boundary(const BinaryMask& m) {
  const BinaryMask b = boundary_mask(m);
  const Geometry& g = m.geometry();
  BoundarySet out;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i]) {
      const auto p = g.coords(i);
      out.points_mm.push_back({g.origin[0] + static_cast<double>(p[0]) * g.spacing[0],
                               g.origin[1] + static_cast<double>(p[1]) * g.spacing[1],
                               g.origin[2] + static_cast<double>(p[2]) * g.spacing[2]});
    }
  return out;
}

/// Per-voxel Euclidean distance (mm) to the nearest boundary voxel of `m`.
inline DistanceMap distance_transform(const BinaryMask& m) {
  const BinaryMask b = boundary_mask(m);
  if (!bounding_box(b)) throw Error("distance_transform: empty mask");
  DistanceMap d = squared_distance_to(b);
  for (double& v : d.values()) v = std::sqrt(v);
  return d;
}

struct SurfaceDistances {
  double asd_mm = 0.0;
  double hd_mm = 0.0;
};

/// Symmetric average and maximum (Hausdorff) boundary-to-boundary distance.
inline SurfaceDistances surface_distances(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a.geometry(), b.geometry(), "surface_distances");
  auto box_a = bounding_box(a);
  const auto box_b = bounding_box(b);
  if (!box_a || !box_b) throw Error("undefined surface distance: empty mask");
  box_a->merge(*box_b);
  // Both boundaries lie inside the union box, so distances computed on the
  // crop are exact.
  const BinaryMask ba = boundary_mask(crop(a, *box_a));
  const BinaryMask bb = boundary_mask(crop(b, *box_a));
  const DistanceMap to_b = squared_distance_to(bb);
  const DistanceMap to_a = squared_distance_to(ba);

  double sum = 0.0, worst2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (ba[i]) {
      sum += std::sqrt(to_b[i]);
      worst2 = std::max(worst2, to_b[i]);
      ++n;
    }
    if (bb[i]) {
      sum += std::sqrt(to_a[i]);
      worst2 = std::max(worst2, to_a[i]);
      ++n;
    }
  }
  return {sum / static_cast<double>(n), std::sqrt(worst2)};
}

/// Per-class scores. Distances are empty when undefined (one side empty);
/// `applicable` is false when the class is absent from both label maps.
struct MetricResult {
  int class_id = 0;
  bool applicable = true;
  std::optional<double> dsc;
  std::optional<double> asd_mm;
  std::optional<double> hd_mm;
  std::optional<double> hd_pre_mm;
  std::string note;
};

inline MetricResult evaluate_class(const BinaryMask& pred, const BinaryMask& gt, int cls,
                                   const BinaryMask* pred_raw = nullptr) {
  MetricResult r;
  r.class_id = cls;
  const bool has_pred = bounding_box(pred).has_value();
  const bool has_gt = bounding_box(gt).has_value();
  if (!has_pred && !has_gt) {
    r.applicable = false;
    r.note = "not applicable: class absent from prediction and ground truth";
    return r;
  }
  r.dsc = dsc(pred, gt);
  if (has_pred && has_gt) {
    const auto sd = surface_distances(pred, gt);
    r.asd_mm = sd.asd_mm;
    r.hd_mm = sd.hd_mm;
  } else {
    r.note = has_pred ? "undefined surface distance: class absent from ground truth"
                      : "undefined surface distance: class absent from prediction";
  }
  if (pred_raw && bounding_box(*pred_raw) && has_gt)
    r.hd_pre_mm = surface_distances(*pred_raw, gt).hd_mm;
  return r;
}

/// `pred_raw`, when given, is the prediction before post-processing and
/// yields the HD* column.
inline std::vector<MetricResult> evaluate_case(const LabelMap& pred, const LabelMap& gt,
                                               const std::vector<int>& classes,
                                               const LabelMap* pred_raw = nullptr) {
  require_same_geometry(pred.geometry(), gt.geometry(), "evaluate_case");
  if (pred_raw) require_same_geometry(pred_raw->geometry(), gt.geometry(), "evaluate_case");
  std::vector<MetricResult> out;
  for (int cls : classes) {
    if (cls < 1 || cls >= gt.num_classes()) throw Error("evaluate_case: class out of range");
    const BinaryMask p = class_mask(pred, cls);
    const BinaryMask g = class_mask(gt, cls);
    if (pred_raw) {
      const BinaryMask raw = class_mask(*pred_raw, cls);
      out.push_back(evaluate_class(p, g, cls, &raw));
    } else {
      out.push_back(evaluate_class(p, g, cls));
    }
  }
  return out;
}

/// Applies largest_component_filter to each listed class; removed voxels
/// become background.
inline LabelMap postprocess_labels(const LabelMap& raw, const std::vector<int>& classes,
                                   double allowance_voxels = 50.0,
                                   Connectivity conn = Connectivity::Vertex,
                                   GapMetric metric = GapMetric::Euclidean) {
  Grid<std::uint8_t> out = raw.grid();
  for (int cls : classes) {
    const BinaryMask m = class_mask(raw, cls);
    if (!bounding_box(m)) continue;
    const BinaryMask kept = largest_component_filter(m, allowance_voxels, conn, metric);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] && !kept[i]) out[i] = 0;
  }
  return LabelMap(std::move(out), raw.num_classes());
}

}  // namespace kneeseg

#endif  // KNEESEG_METRICS_HPP
