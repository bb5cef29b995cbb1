#ifndef KNEESEG_AUGMENT_HPP
#define KNEESEG_AUGMENT_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "kneeseg/grid.hpp"
#include "kneeseg/random.hpp"

namespace kneeseg {

struct AugmentConfig {
  std::array<double, 2> scale_range{0.9, 1.1};
  double rotation_deg_max = 10.0;
  double translation_vox_max = 10.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(scale_range[0] > 0.0) || scale_range[1] < scale_range[0])
      throw Error("augment: invalid scale range");
    if (!(rotation_deg_max >= 0.0) || !(translation_vox_max >= 0.0))
      throw Error("augment: rotation and translation bounds must be >= 0");
  }
};

/// One similarity transform about the volume center, in physical space.
struct AffineParams {
  double scale = 1.0;
  std::array<double, 3> axis{1.0, 0.0, 0.0};  // unit vector, (z, y, x)
  double angle_deg = 0.0;
  std::array<double, 3> translation_vox{0.0, 0.0, 0.0};
};

inline AffineParams sample_affine(const AugmentConfig& cfg) {
  cfg.validate();
  CounterRng rng(cfg.seed, Stream::Augment);
  AffineParams p;
  p.scale = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
  // Uniform direction on the sphere.
  const double cz = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double rxy = std::sqrt(std::max(0.0, 1.0 - cz * cz));
  p.axis = {cz, rxy * std::sin(phi), rxy * std::cos(phi)};
  p.angle_deg = rng.uniform(-cfg.rotation_deg_max, cfg.rotation_deg_max);
  for (double& t : p.translation_vox) t = rng.uniform(-cfg.translation_vox_max, cfg.translation_vox_max);
  return p;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rodrigues rotation about a unit axis.
inline Mat3 rotation_matrix(const std::array<double, 3>& axis, double angle_rad) {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad), t = 1.0 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  return {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
           {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
           {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
}

namespace detail {

/// Source index coordinates for each output voxel (inverse mapping).
class InverseAffine {
 public:
  InverseAffine(const Geometry& g, const AffineParams& p) : g_(g) {
    const Mat3 r = rotation_matrix(p.axis, p.angle_deg * std::numbers::pi / 180.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) inv_[i][j] = r[j][i] / p.scale;  // R^T / s
    for (int a = 0; a < 3; ++a) {
      center_[a] = 0.5 * static_cast<double>(g.dims[a] - 1);
      shift_[a] = p.translation_vox[a];
    }
  }

  std::array<double, 3> source(std::size_t z, std::size_t y, std::size_t x) const {
    const double idx[3] = {double(z), double(y), double(x)};
    double q[3];
    for (int a = 0; a < 3; ++a) q[a] = (idx[a] - center_[a] - shift_[a]) * g_.spacing[a];
    std::array<double, 3> src{};
    for (int a = 0; a < 3; ++a) {
      const double mm = inv_[a][0] * q[0] + inv_[a][1] * q[1] + inv_[a][2] * q[2];
      double v = mm / g_.spacing[a] + center_[a];
      // Round-off must not blur exact integer mappings.
      const double r = std::round(v);
      if (std::abs(v - r) < 1e-9) v = r;
      src[a] = v;
    }
    return src;
  }

 private:
  Geometry g_;
  Mat3 inv_{};
  std::array<double, 3> center_{}, shift_{};
};

}  // namespace detail

/// Applies one transform to both inputs: trilinear for the image, nearest
/// neighbor for the labels; samples outside the field become 0.
inline std::pair<Volume, LabelMap> apply_affine(const Volume& x, const LabelMap& labels,
                                                const AffineParams& p) {
  require_same_geometry(x.geometry(), labels.geometry(), "random_affine");
  const Geometry& g = x.geometry();
  const detail::InverseAffine map(g, p);
  Volume out(g, 0.0f);
  Grid<std::uint8_t> lab(g, 0);
  const auto& d = g.dims;
  const double hi[3] = {double(d[0] - 1), double(d[1] - 1), double(d[2] - 1)};
  std::size_t i = 0;
  for (std::size_t z = 0; z < d[0]; ++z)
    for (std::size_t y = 0; y < d[1]; ++y)
      for (std::size_t xx = 0; xx < d[2]; ++xx, ++i) {
        const auto s = map.source(z, y, xx);

        bool nn_in = true;
        std::array<std::size_t, 3> nn{};
        for (int a = 0; a < 3; ++a) {
          const double r = std::round(s[a]);
          nn_in = nn_in && r >= 0.0 && r <= hi[a];
          nn[a] = nn_in ? static_cast<std::size_t>(r) : 0;
        }
        if (nn_in) lab[i] = labels.grid().at(nn[0], nn[1], nn[2]);

        if (s[0] < 0.0 || s[1] < 0.0 || s[2] < 0.0 || s[0] > hi[0] || s[1] > hi[1] || s[2] > hi[2])
          continue;
        std::size_t base[3];
        double frac[3];
        for (int a = 0; a < 3; ++a) {
          base[a] = static_cast<std::size_t>(std::floor(s[a]));
          if (base[a] + 1 > d[a] - 1) base[a] = d[a] > 1 ? d[a] - 2 : 0;
          frac[a] = d[a] > 1 ? s[a] - static_cast<double>(base[a]) : 0.0;
        }
        double acc = 0.0;
        for (int c = 0; c < 8; ++c) {
          double w = 1.0;
          std::size_t idx[3];
          for (int a = 0; a < 3; ++a) {
            const int bit = (c >> (2 - a)) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            idx[a] = std::min(base[a] + bit, d[a] - 1);
          }
          if (w != 0.0) acc += w * x.at(idx[0], idx[1], idx[2]);
        }
        out[i] = static_cast<float>(acc);
      }
  return {std::move(out), LabelMap(std::move(lab), labels.num_classes())};
}

inline std::pair<Volume, LabelMap> random_affine(const Volume& x, const LabelMap& labels,
                                                 const AugmentConfig& cfg) {
  return apply_affine(x, labels, sample_affine(cfg));
}

}  // namespace kneeseg

#endif  // KNEESEG_AUGMENT_HPP
