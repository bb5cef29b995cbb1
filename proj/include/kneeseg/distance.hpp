#ifndef KNEESEG_DISTANCE_HPP
#define KNEESEG_DISTANCE_HPP

// Exact Euclidean distance transform (Felzenszwalb & Huttenlocher lower
// envelope of parabolas), one pass per axis, with per-axis spacing.

#include <cmath>
#include <limits>
#include <vector>

#include "kneeseg/grid.hpp"
#include "kneeseg/region.hpp"

namespace kneeseg {

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// In place: f[k] <- min_j f[j] + ((k - j) * h)^2 over the line.
class EnvelopeScratch {
 public:
  void transform(double* f, std::size_t stride, std::size_t n, double h) {
    vertex_.resize(n);
    bound_.resize(n + 1);
    src_.resize(n);
    for (std::size_t k = 0; k < n; ++k) src_[k] = f[k * stride];

    const double h2 = h * h;
    std::size_t count = 0;  // parabolas in the envelope
    for (std::size_t q = 0; q < n; ++q) {
      if (src_[q] == kInf) continue;
      const double fq = src_[q] + h2 * static_cast<double>(q) * static_cast<double>(q);
      double s = 0.0;
      while (count > 0) {
        const std::size_t v = vertex_[count - 1];
        const double fv = src_[v] + h2 * static_cast<double>(v) * static_cast<double>(v);
        s = (fq - fv) / (2.0 * h2 * static_cast<double>(q - v));
        if (s > bound_[count - 1]) break;
        --count;
      }
      vertex_[count] = q;
      bound_[count] = count == 0 ? -kInf : s;
      ++count;
      bound_[count] = kInf;
    }
    if (count == 0) {
      for (std::size_t k = 0; k < n; ++k) f[k * stride] = kInf;
      return;
    }
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
      while (bound_[j + 1] < static_cast<double>(k)) ++j;
      const double d = (static_cast<double>(k) - static_cast<double>(vertex_[j])) * h;
      f[k * stride] = src_[vertex_[j]] + d * d;
    }
  }

 private:
  std::vector<std::size_t> vertex_;
  std::vector<double> bound_;
  std::vector<double> src_;
};

}  // namespace detail

/// Squared distance (mm^2) from each voxel center to the nearest seed voxel
/// center; +inf everywhere when there are no seeds.
inline DistanceMap squared_distance_to(const BinaryMask& seeds) {
  DistanceMap d(seeds.geometry(), detail::kInf);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (seeds[i]) d[i] = 0.0;
  detail::EnvelopeScratch scratch;
  // x first: rows without seeds stay +inf and are skipped by later passes.
  for (int axis = 2; axis >= 0; --axis) {
    const double h = seeds.spacing()[axis];
    for_each_line(d.dims(), axis, [&](std::size_t first, std::size_t stride, std::size_t n) {
      scratch.transform(d.values().data() + first, stride, n, h);
    });
  }
  return d;
}

}  // namespace kneeseg

#endif  // KNEESEG_DISTANCE_HPP
