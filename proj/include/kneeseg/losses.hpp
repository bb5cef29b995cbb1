#ifndef KNEESEG_LOSSES_HPP
#define KNEESEG_LOSSES_HPP

// Forward evaluation of the reconstruction, Dice and focal cross-entropy
// losses. All reductions accumulate in double in voxel-index order.

#include <algorithm>
#include <cmath>
#include <vector>

#include "kneeseg/grid.hpp"
#include "kneeseg/morphology.hpp"

namespace kneeseg {

struct LossConfig {
  double alpha = 10.0;
  double beta = 99.0;
  std::vector<double> class_weights{1, 1, 1, 1, 1, 10, 10, 10, 10, 10};
  std::size_t dilation_radius_voxels = 50;
  float fill_value = 0.0f;

  void validate() const {
    auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!ok(alpha) || !ok(beta)) throw Error("loss config: alpha and beta must be finite and >= 0");
    for (double w : class_weights)
      if (!ok(w)) throw Error("loss config: class weights must be finite and >= 0");
  }
};

constexpr double kLogFloor = 1e-7;

/// Per-voxel squared difference.
inline Volume error_map(const Volume& x, const Volume& recon) {
  require_same_geometry(x.geometry(), recon.geometry(), "error_map");
  Volume e(x.geometry());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(recon[i]);
    e[i] = static_cast<float>(d * d);
  }
  return e;
}

/// F = 1 + beta * E.
inline Volume focal_weights(const Volume& e, double beta) {
  Volume f(e.geometry());
  for (std::size_t i = 0; i < e.size(); ++i)
    f[i] = static_cast<float>(1.0 + beta * static_cast<double>(e[i]));
  return f;
}

/// Union of the bone classes, dilated, then erased from the image.
inline Volume prepare_masked_input(const Volume& x, const LabelMap& bones,
                                   const std::vector<int>& bone_classes, const LossConfig& cfg) {
  require_same_geometry(x.geometry(), bones.geometry(), "prepare_masked_input");
  if (bone_classes.empty()) throw Error("prepare_masked_input: no bone classes given");
  const BinaryMask region = dilate(union_mask(bones, bone_classes), cfg.dilation_radius_voxels);
  return erase_region(x, region, cfg.fill_value);
}

inline double mse(const Volume& a, const Volume& b) {
  require_same_geometry(a.geometry(), b.geometry(), "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

/// Inpainting loss: MSE(x, G(x)).
inline double loss_g(const Volume& x, const Volume& gx) { return mse(x, gx); }

/// MSE(G(x), A(x)) + MSE(E(G(x)), E(A(x))), error maps kept in double.
inline double loss_a(const Volume& x, const Volume& gx, const Volume& ax) {
  require_same_geometry(x.geometry(), gx.geometry(), "loss_a");
  require_same_geometry(x.geometry(), ax.geometry(), "loss_a");
  double recon = 0.0, err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = gx[i], a = ax[i], xi = x[i];
    recon += (g - a) * (g - a);
    const double eg = (xi - g) * (xi - g), ea = (xi - a) * (xi - a);
    err += (eg - ea) * (eg - ea);
  }
  const auto n = static_cast<double>(x.size());
  return recon / n + err / n;
}

namespace detail {

inline void require_matching(const ProbabilityMap& u, const ProbabilityMap& v, const char* what) {
  if (u.num_classes() != v.num_classes()) throw Error(std::string(what) + ": channel-count mismatch");
  require_same_geometry(u.geometry(), v.geometry(), what);
}

struct DiceSums {
  double uv = 0.0, u = 0.0, v = 0.0;
};

inline std::vector<DiceSums> dice_sums(const ProbabilityMap& u, const ProbabilityMap& v) {
  std::vector<DiceSums> out(static_cast<std::size_t>(u.num_classes()));
  const std::size_t n = u.voxel_count();
  for (int k = 0; k < u.num_classes(); ++k) {
    const float* uk = u.channel(k);
    const float* vk = v.channel(k);
    DiceSums s;
    for (std::size_t i = 0; i < n; ++i) {
      s.uv += static_cast<double>(uk[i]) * vk[i];
      s.u += uk[i];
      s.v += vk[i];
    }
    out[k] = s;
  }
  return out;
}

}  // namespace detail

/// 1 - (2/|K|) sum_k sum(u v) / (sum u + sum v); background counts as a class.
/// A channel empty in both maps contributes a zero overlap term.
inline double dice_loss(const ProbabilityMap& u, const ProbabilityMap& v) {
  detail::require_matching(u, v, "dice_loss");
  double acc = 0.0;
  for (const auto& s : detail::dice_sums(u, v))
    if (s.u + s.v > 0.0) acc += s.uv / (s.u + s.v);
  return 1.0 - 2.0 / u.num_classes() * acc;
}

/// -sum_i sum_k F_i v_ik log(max(u_ik, 1e-7)), summed (not averaged) over voxels.
inline double focal_ce_loss(const ProbabilityMap& u, const ProbabilityMap& v, const Volume& f) {
  detail::require_matching(u, v, "focal_ce_loss");
  require_same_geometry(u.geometry(), f.geometry(), "focal_ce_loss");
  const std::size_t n = u.voxel_count();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double voxel = 0.0;
    for (int k = 0; k < u.num_classes(); ++k) {
      const float vk = v(i, k);
      if (vk == 0.0f) continue;
      const double p = std::clamp(static_cast<double>(u(i, k)), kLogFloor, 1.0);
      voxel += vk * std::log(p);
    }
    acc -= static_cast<double>(f[i]) * voxel;
  }
  return acc;
}

/// Dice + alpha * focal CE with F = 1 + beta * E.
inline double total_seg_loss(const ProbabilityMap& u, const ProbabilityMap& v, const Volume& e,
                             const LossConfig& cfg) {
  cfg.validate();
  return dice_loss(u, v) + cfg.alpha * focal_ce_loss(u, v, focal_weights(e, cfg.beta));
}

/// (1/|K|) sum_k w_k (1 - 2 sum(u v) / (sum u + sum v)), with w_k = 0 for a
/// channel empty in both maps.
inline double weighted_dice_loss(const ProbabilityMap& u, const ProbabilityMap& v,
                                 const LossConfig& cfg) {
  detail::require_matching(u, v, "weighted_dice_loss");
  if (cfg.class_weights.size() != static_cast<std::size_t>(u.num_classes()))
    throw Error("weighted_dice_loss: weight vector length != class count");
  const auto sums = detail::dice_sums(u, v);
  double acc = 0.0;
  for (std::size_t k = 0; k < sums.size(); ++k) {
    const auto& s = sums[k];
    const double denom = s.u + s.v;
    if (denom == 0.0) continue;
    acc += cfg.class_weights[k] * (1.0 - 2.0 * s.uv / denom);
  }
  return acc / u.num_classes();
}

inline double total_transfer_loss(const ProbabilityMap& u, const ProbabilityMap& v, const Volume& e,
                                  const LossConfig& cfg) {
  cfg.validate();
  return weighted_dice_loss(u, v, cfg) + cfg.alpha * focal_ce_loss(u, v, focal_weights(e, cfg.beta));
}

}  // namespace kneeseg

#endif  // KNEESEG_LOSSES_HPP
