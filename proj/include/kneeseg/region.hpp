#ifndef KNEESEG_REGION_HPP
#define KNEESEG_REGION_HPP

#include <algorithm>
#include <array>
#include <optional>

#include "kneeseg/grid.hpp"

namespace kneeseg {

/// Half-open index box [lo, hi) per axis.
struct Box {
  std::array<std::size_t, 3> lo{0, 0, 0};
  std::array<std::size_t, 3> hi{0, 0, 0};

  std::array<std::size_t, 3> extent() const { return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}; }
  void include(const std::array<std::size_t, 3>& p) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a] + 1);
    }
  }
  void merge(const Box& o) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], o.lo[a]);
      hi[a] = std::max(hi[a], o.hi[a]);
    }
  }
};

template <class T>
std::optional<Box> bounding_box(const Grid<T>& m) {
  const auto& d = m.dims();
  Box b{{d[0], d[1], d[2]}, {0, 0, 0}};
  bool any = false;
  std::size_t i = 0;
  for (std::size_t z = 0; z < d[0]; ++z)
    for (std::size_t y = 0; y < d[1]; ++y)
      for (std::size_t x = 0; x < d[2]; ++x, ++i)
        if (m[i]) {
          b.include({z, y, x});
          any = true;
        }
  if (!any) return std::nullopt;
  return b;
}

/// Copies the box into a grid of its own; spacing is kept and the origin moves
/// to the box corner.
template <class T>
Grid<T> crop(const Grid<T>& m, const Box& b) {
  Geometry g = m.geometry();
  g.dims = b.extent();
  for (int a = 0; a < 3; ++a) g.origin[a] += static_cast<double>(b.lo[a]) * g.spacing[a];
  Grid<T> out(g);
  std::size_t o = 0;
  for (std::size_t z = b.lo[0]; z < b.hi[0]; ++z)
    for (std::size_t y = b.lo[1]; y < b.hi[1]; ++y) {
      const std::size_t row = m.geometry().index(z, y, b.lo[2]);
      for (std::size_t x = 0; x < g.dims[2]; ++x) out[o++] = m[row + x];
    }
  return out;
}

/// Writes `part` (cropped with `b`) back into `full`.
template <class T>
void paste(Grid<T>& full, const Grid<T>& part, const Box& b) {
  std::size_t o = 0;
  for (std::size_t z = b.lo[0]; z < b.hi[0]; ++z)
    for (std::size_t y = b.lo[1]; y < b.hi[1]; ++y) {
      const std::size_t row = full.geometry().index(z, y, b.lo[2]);
      for (std::size_t x = b.lo[2]; x < b.hi[2]; ++x) full[row + x - b.lo[2]] = part[o++];
    }
}

/// Calls fn(first_index, stride, length) for every line parallel to `axis`.
template <class Fn>
void for_each_line(const std::array<std::size_t, 3>& d, int axis, Fn&& fn) {
  const std::array<std::size_t, 3> stride{d[1] * d[2], d[2], 1};
  const int a1 = axis == 0 ? 1 : 0;
  const int a2 = axis == 2 ? 1 : 2;
  for (std::size_t i = 0; i < d[a1]; ++i)
    for (std::size_t j = 0; j < d[a2]; ++j)
      fn(i * stride[a1] + j * stride[a2], stride[axis], d[axis]);
}

}  // namespace kneeseg

#endif  // KNEESEG_REGION_HPP
