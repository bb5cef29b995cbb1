#ifndef KNEESEG_COMPONENTS_HPP
#define KNEESEG_COMPONENTS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "kneeseg/distance.hpp"
#include "kneeseg/grid.hpp"
#include "kneeseg/morphology.hpp"
#include "kneeseg/region.hpp"

namespace kneeseg {

enum class Connectivity { Face = 6, Edge = 18, Vertex = 26 };

inline Connectivity connectivity_from_int(int c) {
  switch (c) {
    case 6: return Connectivity::Face;
    case 18: return Connectivity::Edge;
    case 26: return Connectivity::Vertex;
    default: throw Error("connectivity must be 6, 18 or 26");
  }
}

/// Neighbor offsets (dz, dy, dx) for the given adjacency.
inline std::vector<std::array<int, 3>> neighbor_offsets(Connectivity c) {
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nonzero = (dz != 0) + (dy != 0) + (dx != 0);
        if (nonzero == 0) continue;
        if (c == Connectivity::Face && nonzero > 1) continue;
        if (c == Connectivity::Edge && nonzero > 2) continue;
        out.push_back({dz, dy, dx});
      }
  return out;
}

/// Labels are 0 for background and 1..n in order of each component's first
/// voxel in scan order. voxel_counts[id - 1] belongs to component `id`.
struct ComponentSet {
  Grid<std::uint32_t> labels;
  std::vector<std::size_t> voxel_counts;

  std::size_t size() const { return voxel_counts.size(); }
  double volume_mm3(std::uint32_t id) const {
    return static_cast<double>(voxel_counts.at(id - 1)) * labels.geometry().voxel_volume();
  }
  /// Lowest id among the components with the most voxels; 0 when empty.
  std::uint32_t largest() const {
    std::uint32_t best = 0;
    for (std::uint32_t id = 1; id <= voxel_counts.size(); ++id)
      if (best == 0 || voxel_counts[id - 1] > voxel_counts[best - 1]) best = id;
    return best;
  }
};

inline ComponentSet connected_components(const BinaryMask& m,
                                         Connectivity conn = Connectivity::Vertex) {
  ComponentSet cs{Grid<std::uint32_t>(m.geometry(), 0u), {}};
  const auto& d = m.dims();
  const auto offsets = neighbor_offsets(conn);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < m.size(); ++seed) {
    if (!m[seed] || cs.labels[seed]) continue;
    const auto id = static_cast<std::uint32_t>(cs.voxel_counts.size() + 1);
    std::size_t n = 0;
    cs.labels[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++n;
      const auto p = m.geometry().coords(i);
      for (const auto& o : offsets) {
        const auto z = static_cast<std::ptrdiff_t>(p[0]) + o[0];
        const auto y = static_cast<std::ptrdiff_t>(p[1]) + o[1];
        const auto x = static_cast<std::ptrdiff_t>(p[2]) + o[2];
        if (z < 0 || y < 0 || x < 0 || z >= static_cast<std::ptrdiff_t>(d[0]) ||
            y >= static_cast<std::ptrdiff_t>(d[1]) || x >= static_cast<std::ptrdiff_t>(d[2]))
          continue;
        const std::size_t j = m.geometry().index(z, y, x);
        if (m[j] && !cs.labels[j]) {
          cs.labels[j] = id;
          stack.push_back(j);
        }
      }
    }
    cs.voxel_counts.push_back(n);
  }
  return cs;
}

enum class GapMetric { Euclidean, Chebyshev };

/// Keeps the largest component plus every other component that comes within
/// `allowance_voxels` of it (voxel units, voxel-center to voxel-center).
inline BinaryMask largest_component_filter(const BinaryMask& m, double allowance_voxels = 50.0,
                                           Connectivity conn = Connectivity::Vertex,
                                           GapMetric metric = GapMetric::Euclidean) {
  const auto box = bounding_box(m);
  if (!box) throw Error("largest_component_filter: no foreground");
  // Every seed and every query voxel is inside the foreground box, so the
  // distance field restricted to it is exact.
  const BinaryMask sub = crop(m, *box);
  const ComponentSet cs = connected_components(sub, conn);
  const std::uint32_t keep_id = cs.largest();

  BinaryMask largest(sub.geometry());
  for (std::size_t i = 0; i < sub.size(); ++i) largest[i] = cs.labels[i] == keep_id;

  std::vector<std::uint8_t> keep(cs.size() + 1, 0);
  keep[keep_id] = 1;
  if (metric == GapMetric::Euclidean) {
    Geometry unit = sub.geometry();
    unit.spacing = {1.0, 1.0, 1.0};
    const DistanceMap d2 = squared_distance_to(BinaryMask(unit, largest.values()));
    const double limit = allowance_voxels * allowance_voxels;
    for (std::size_t i = 0; i < sub.size(); ++i)
      if (cs.labels[i] && d2[i] <= limit) keep[cs.labels[i]] = 1;
  } else {
    const auto r = static_cast<std::size_t>(std::floor(allowance_voxels));
    const BinaryMask reach = dilate(largest, r);
    for (std::size_t i = 0; i < sub.size(); ++i)
      if (cs.labels[i] && reach[i]) keep[cs.labels[i]] = 1;
  }

  BinaryMask kept(sub.geometry());
  for (std::size_t i = 0; i < sub.size(); ++i) kept[i] = cs.labels[i] && keep[cs.labels[i]];
  BinaryMask out(m.geometry());
  paste(out, kept, *box);
  return out;
}

/// Drops components whose physical volume is strictly below the threshold.
inline BinaryMask remove_small_components(const BinaryMask& m, double min_volume_mm3,
                                          Connectivity conn = Connectivity::Vertex) {
  if (min_volume_mm3 <= 0.0) return m;
  const auto box = bounding_box(m);
  if (!box) return m;
  const BinaryMask sub = crop(m, *box);
  const ComponentSet cs = connected_components(sub, conn);
  std::vector<std::uint8_t> keep(cs.size() + 1, 0);
  for (std::uint32_t id = 1; id <= cs.size(); ++id) keep[id] = cs.volume_mm3(id) >= min_volume_mm3;
  BinaryMask kept(sub.geometry());
  for (std::size_t i = 0; i < sub.size(); ++i) kept[i] = keep[cs.labels[i]];
  BinaryMask out(m.geometry());
  paste(out, kept, *box);
  return out;
}

}  // namespace kneeseg

#endif  // KNEESEG_COMPONENTS_HPP
