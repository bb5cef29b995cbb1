#ifndef KNEESEG_INTENSITY_HPP
#define KNEESEG_INTENSITY_HPP

#include <algorithm>
#include <cmath>
#include <optional>

#include "kneeseg/grid.hpp"

namespace kneeseg {

struct ZStats {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Population mean and standard deviation, over `mask` voxels when given.
inline ZStats z_stats(const Volume& x, const BinaryMask* mask = nullptr) {
  if (mask) require_same_geometry(x.geometry(), mask->geometry(), "z_normalize");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!mask || (*mask)[i]) {
      sum += x[i];
      ++n;
    }
  if (n == 0) throw Error("z_normalize: empty statistics mask");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!mask || (*mask)[i]) ss += (x[i] - mean) * (x[i] - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0)) throw Error("z_normalize: constant volume");
  return {mean, sd};
}

/// z-score, clip to [-5, 5], then map [-5, 5] onto [0, 1].
inline Volume apply_z_normalize(const Volume& x, const ZStats& s) {
  Volume out(x.geometry());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = std::clamp((x[i] - s.mean) / s.stddev, -5.0, 5.0);
    out[i] = static_cast<float>((z + 5.0) / 10.0);
  }
  return out;
}

inline Volume z_normalize(const Volume& x, const BinaryMask* mask = nullptr) {
  require_finite(x, "z_normalize");
  return apply_z_normalize(x, z_stats(x, mask));
}

}  // namespace kneeseg

#endif  // KNEESEG_INTENSITY_HPP
