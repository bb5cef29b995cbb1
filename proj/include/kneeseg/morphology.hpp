#ifndef KNEESEG_MORPHOLOGY_HPP
#define KNEESEG_MORPHOLOGY_HPP

#include <limits>
#include <vector>

#include "kneeseg/grid.hpp"
#include "kneeseg/region.hpp"

namespace kneeseg {

/// Binary dilation with a (2r+1)^3 cube: a voxel is set iff some input voxel
/// lies within Chebyshev distance r. Separable, linear in the voxel count.
inline BinaryMask dilate(const BinaryMask& m, std::size_t radius) {
  BinaryMask out = m;
  if (radius == 0) return out;
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
  std::vector<std::uint8_t> line;
  std::vector<std::size_t> back;
  for (int axis = 0; axis < 3; ++axis) {
    for_each_line(out.dims(), axis, [&](std::size_t first, std::size_t stride, std::size_t n) {
      line.resize(n);
      for (std::size_t k = 0; k < n; ++k) line[k] = out[first + k * stride];
      // Forward pass: distance to the nearest set voxel at or before k.
      std::size_t since = kFar;
      back.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        since = line[k] ? 0 : (since == kFar ? kFar : since + 1);
        back[k] = since;
      }
      since = kFar;
      for (std::size_t k = n; k-- > 0;) {
        since = line[k] ? 0 : (since == kFar ? kFar : since + 1);
        out[first + k * stride] = (back[k] <= radius || since <= radius) ? 1 : 0;
      }
    });
  }
  return out;
}

inline Volume erase_region(const Volume& x, const BinaryMask& m, float fill) {
  require_same_geometry(x.geometry(), m.geometry(), "erase_region");
  Volume out = x;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (m[i]) out[i] = fill;
  return out;
}

}  // namespace kneeseg

#endif  // KNEESEG_MORPHOLOGY_HPP
