#ifndef KNEESEG_PHANTOM_HPP
#define KNEESEG_PHANTOM_HPP

// Synthetic knee-like phantoms: three ellipsoidal bones with cartilage shells
// on their articular sides and spherical lesions inside the bones. Used as a
// stand-in dataset wherever real scans and trained networks would be needed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kneeseg/components.hpp"
#include "kneeseg/distance.hpp"
#include "kneeseg/grid.hpp"
#include "kneeseg/labels.hpp"
#include "kneeseg/random.hpp"

namespace kneeseg {

struct PhantomConfig {
  std::array<std::size_t, 3> dims{64, 128, 128};
  std::array<double, 3> spacing{0.7, 0.365, 0.365};
  std::uint64_t seed = 0;
  std::array<int, 3> lesion_count{2, 2, 1};  // femur, tibia, patella
  std::array<double, 2> lesion_radius_mm{1.0, 2.5};
  double lesion_intensity_delta = 0.35;
  double noise_sigma = 0.02;
  double lesion_free_rate = 0.0;  // chance a bone gets no lesions at all

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 32) throw Error("phantom: geometry too small (need >= 32 voxels per axis)");
      if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) throw Error("phantom: invalid spacing");
      if (lesion_count[a] < 0) throw Error("phantom: negative lesion count");
    }
    if (!(lesion_radius_mm[0] > 0.0) || lesion_radius_mm[1] < lesion_radius_mm[0])
      throw Error("phantom: invalid lesion radius range");
    if (!(lesion_intensity_delta > 0.0)) throw Error("phantom: lesion intensity delta must be > 0");
    if (!(noise_sigma >= 0.0)) throw Error("phantom: noise sigma must be >= 0");
    if (!(lesion_free_rate >= 0.0 && lesion_free_rate <= 1.0))
      throw Error("phantom: lesion-free rate must lie in [0, 1]");
  }
};

inline constexpr float kBackgroundIntensity = 0.05f;
inline constexpr float kBoneIntensity = 0.30f;
inline constexpr float kCartilageIntensity = 0.65f;

/// Ellipsoid in voxel-index coordinates with the joint-facing side.
struct EllipsoidBone {
  BoneLabels labels;
  std::array<double, 3> center;
  std::array<double, 3> radii;
  int articular_axis;  // cartilage grows on this axis ...
  int articular_sign;  // ... on this side of the center

  double level(double z, double y, double x, double grow = 0.0) const {
    const double p[3] = {z, y, x};
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double t = (p[a] - center[a]) / (radii[a] + grow);
      s += t * t;
    }
    return s;
  }
  bool contains(double z, double y, double x) const { return level(z, y, x) <= 1.0; }
};

struct PhantomLesion {
  Bone bone;
  std::array<std::size_t, 3> center;
  double radius_mm;
};

struct Phantom {
  Volume image;
  LabelMap labels;
  std::vector<EllipsoidBone> bones;
  std::vector<PhantomLesion> lesions;
  std::size_t cartilage_thickness_voxels = 1;
};

namespace detail {

inline std::vector<EllipsoidBone> layout_bones(const PhantomConfig& cfg, CounterRng& rng) {
  const LabelScheme scheme = LabelScheme::knee();
  struct Frac {
    std::array<double, 3> c, r;
    int axis, sign;
  };
  // Fractions of the volume extent: femur above tibia along y, patella in
  // front of the femur along x.
  const Frac frac[3] = {{{0.50, 0.28, 0.45}, {0.40, 0.18, 0.28}, 1, +1},
                        {{0.50, 0.72, 0.45}, {0.38, 0.16, 0.26}, 1, -1},
                        {{0.50, 0.30, 0.87}, {0.20, 0.10, 0.05}, 2, -1}};
  std::vector<EllipsoidBone> out;
  for (int b = 0; b < 3; ++b) {
    EllipsoidBone e{scheme.bones[b], {}, {}, frac[b].axis, frac[b].sign};
    for (int a = 0; a < 3; ++a) {
      const double n = static_cast<double>(cfg.dims[a]);
      e.center[a] = (frac[b].c[a] + rng.uniform(-0.01, 0.01)) * n - 0.5;
      e.radii[a] = frac[b].r[a] * rng.uniform(0.97, 1.03) * n;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

/// Pure function of the config: identical configs give bit-identical output.
inline Phantom generate_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  Geometry g;
  g.dims = cfg.dims;
  g.spacing = cfg.spacing;
  CounterRng layout(cfg.seed, Stream::PhantomLayout);

  Phantom ph;
  ph.bones = detail::layout_bones(cfg, layout);
  const std::size_t thick = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(0.015 * static_cast<double>(std::min(g.dims[1], g.dims[2])))));
  ph.cartilage_thickness_voxels = thick;

  Grid<std::uint8_t> labels(g, 0);
  const auto& d = g.dims;
  std::size_t i = 0;
  for (std::size_t z = 0; z < d[0]; ++z)
    for (std::size_t y = 0; y < d[1]; ++y)
      for (std::size_t x = 0; x < d[2]; ++x, ++i) {
        const double p[3] = {double(z), double(y), double(x)};
        for (const auto& b : ph.bones)
          if (b.contains(p[0], p[1], p[2])) labels[i] = static_cast<std::uint8_t>(b.labels.bone_class);
        if (labels[i]) continue;
        for (const auto& b : ph.bones) {
          const bool facing = (p[b.articular_axis] - b.center[b.articular_axis]) * b.articular_sign > 0.0;
          if (facing && b.level(p[0], p[1], p[2], static_cast<double>(thick)) <= 1.0) {
            labels[i] = static_cast<std::uint8_t>(b.labels.cartilage_class);
            break;
          }
        }
      }

  // Lesions: spheres whose voxels and their face neighbors all lie inside the
  // host bone, so no lesion voxel touches the bone surface.
  CounterRng presence(cfg.seed, Stream::PhantomLayout, std::uint64_t{1} << 40);
  auto in_bone = [&](const EllipsoidBone& bone, std::ptrdiff_t z, std::ptrdiff_t y, std::ptrdiff_t x) {
    return z >= 0 && y >= 0 && x >= 0 && z < std::ptrdiff_t(d[0]) && y < std::ptrdiff_t(d[1]) &&
           x < std::ptrdiff_t(d[2]) && bone.contains(double(z), double(y), double(x));
  };
  for (int b = 0; b < 3; ++b) {
    const EllipsoidBone& bone = ph.bones[b];
    const int lesions = presence.uniform() < cfg.lesion_free_rate ? 0 : cfg.lesion_count[b];
    for (int n = 0; n < lesions; ++n) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const double r = layout.uniform(cfg.lesion_radius_mm[0], cfg.lesion_radius_mm[1]);
        std::array<std::ptrdiff_t, 3> c{}, lo{}, hi{};
        for (int a = 0; a < 3; ++a) {
          const double inner = std::max(0.0, bone.radii[a] - r / g.spacing[a] - 1.0);
          c[a] = std::lround(layout.uniform(bone.center[a] - inner, bone.center[a] + inner));
          const auto ext = static_cast<std::ptrdiff_t>(std::floor(r / g.spacing[a]));
          lo[a] = c[a] - ext;
          hi[a] = c[a] + ext;
        }
        bool fits = true;
        for (auto z = lo[0]; z <= hi[0] && fits; ++z)
          for (auto y = lo[1]; y <= hi[1] && fits; ++y)
            for (auto x = lo[2]; x <= hi[2] && fits; ++x) {
              const double dz = (z - c[0]) * g.spacing[0], dy = (y - c[1]) * g.spacing[1],
                           dx = (x - c[2]) * g.spacing[2];
              if (dz * dz + dy * dy + dx * dx <= r * r)
                fits = in_bone(bone, z, y, x) && in_bone(bone, z - 1, y, x) && in_bone(bone, z + 1, y, x) &&
                       in_bone(bone, z, y - 1, x) && in_bone(bone, z, y + 1, x) && in_bone(bone, z, y, x - 1) &&
                       in_bone(bone, z, y, x + 1);
            }
        if (!fits) continue;
        for (auto z = lo[0]; z <= hi[0]; ++z)
          for (auto y = lo[1]; y <= hi[1]; ++y)
            for (auto x = lo[2]; x <= hi[2]; ++x) {
              const double dz = (z - c[0]) * g.spacing[0], dy = (y - c[1]) * g.spacing[1],
                           dx = (x - c[2]) * g.spacing[2];
              if (dz * dz + dy * dy + dx * dx <= r * r)
                labels.at(z, y, x) = static_cast<std::uint8_t>(bone.labels.lesion_class);
            }
        ph.lesions.push_back({bone.labels.bone,
                              {static_cast<std::size_t>(c[0]), static_cast<std::size_t>(c[1]),
                               static_cast<std::size_t>(c[2])},
                              r});
        placed = true;
      }
      if (!placed)
        throw Error(std::string("phantom: geometry too small to place a lesion in the ") +
                    to_string(bone.labels.bone));
    }
  }

  Volume image(g, kBackgroundIntensity);
  const CounterRng noise(cfg.seed, Stream::PhantomNoise);
  for (std::size_t k = 0; k < image.size(); ++k) {
    double v = kBackgroundIntensity;
    switch (labels[k]) {
      case 1: case 3: case 5: v = kBoneIntensity; break;
      case 2: case 4: case 6: v = kCartilageIntensity; break;
      case 7: case 8: case 9: v = kBoneIntensity + cfg.lesion_intensity_delta; break;
      default: break;
    }
    if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * noise.normal_at(k);
    image[k] = static_cast<float>(v);
  }

  ph.image = std::move(image);
  ph.labels = LabelMap(std::move(labels), 10);
  return ph;
}

/// Stand-in for a lesion-free reconstruction: every lesion voxel takes the
/// mean intensity of its host bone's non-lesion voxels.
inline Volume simulate_reconstruction(const Volume& x, const LabelMap& labels,
                                      const LabelScheme& scheme = LabelScheme::knee()) {
  require_same_geometry(x.geometry(), labels.geometry(), "simulate_reconstruction");
  Volume out = x;
  for (const auto& b : scheme.bones) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (labels[i] == b.bone_class) {
        sum += x[i];
        ++n;
      }
    if (n == 0) continue;
    const auto mean = static_cast<float>(sum / static_cast<double>(n));
    for (std::size_t i = 0; i < x.size(); ++i)
      if (labels[i] == b.lesion_class) out[i] = mean;
  }
  return out;
}

/// Simulated network output derived from a reference label map.
struct PredictionConfig {
  std::uint64_t seed = 0;
  int stray_class = 1;
  std::size_t stray_count = 0;
  double stray_min_distance_voxels = 60.0;
  double lesion_miss_rate = 0.0;     // chance a reference lesion is dropped
  double false_lesion_rate = 0.0;    // chance a lesion-free bone gets a spurious spot
  std::size_t false_lesion_radius_voxels = 1;
};

struct SimulatedPrediction {
  LabelMap labels;
  std::array<Volume, 3> lesion_probability;  // femur, tibia, patella lesion channels
  std::vector<std::array<std::size_t, 3>> strays;
};

/// Background voxels farther than `min_distance_voxels` (isotropic voxel
/// units) from class `cls`, chosen with the given seed; each becomes a
/// single-voxel component of `cls`.
inline std::vector<std::array<std::size_t, 3>> inject_strays(Grid<std::uint8_t>& labels, int cls,
                                                             std::size_t count, double min_distance_voxels,
                                                             std::uint64_t seed) {
  if (count == 0) return {};
  BinaryMask target(labels.geometry());
  for (std::size_t i = 0; i < labels.size(); ++i) target[i] = labels[i] == cls;
  if (!bounding_box(target)) throw Error("inject_strays: class absent");
  Geometry unit = labels.geometry();
  unit.spacing = {1.0, 1.0, 1.0};
  const DistanceMap d2 = squared_distance_to(BinaryMask(unit, target.values()));
  std::vector<std::size_t> candidates;
  const double limit = min_distance_voxels * min_distance_voxels;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 0 && d2[i] > limit) candidates.push_back(i);
  if (candidates.size() < count) throw Error("inject_strays: not enough room for stray voxels");
  CounterRng rng(seed, Stream::Prediction, 1u << 20);
  std::vector<std::array<std::size_t, 3>> out;
  for (std::size_t n = 0; n < count; ++n) {
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(candidates.size()));
    const std::size_t i = candidates[std::min(pick, candidates.size() - 1)];
    labels[i] = static_cast<std::uint8_t>(cls);
    out.push_back(labels.geometry().coords(i));
  }
  return out;
}

inline SimulatedPrediction simulate_prediction(const Phantom& ph, const PredictionConfig& cfg) {
  Grid<std::uint8_t> labels = ph.labels.grid();
  const Geometry& g = labels.geometry();
  CounterRng rng(cfg.seed, Stream::Prediction);

  // Drop whole lesion components or plant spurious spots, bone by bone.
  for (const auto& bone : ph.bones) {
    const int lc = bone.labels.lesion_class;
    BinaryMask lesion(g);
    for (std::size_t i = 0; i < labels.size(); ++i) lesion[i] = labels[i] == lc;
    const ComponentSet cs = connected_components(lesion);
    for (std::uint32_t id = 1; id <= cs.size(); ++id)
      if (rng.uniform() < cfg.lesion_miss_rate)
        for (std::size_t i = 0; i < labels.size(); ++i)
          if (cs.labels[i] == id) labels[i] = static_cast<std::uint8_t>(bone.labels.bone_class);
    if (cs.size() == 0 && rng.uniform() < cfg.false_lesion_rate) {
      const auto r = static_cast<std::ptrdiff_t>(cfg.false_lesion_radius_voxels);
      std::array<std::ptrdiff_t, 3> c{};
      for (int a = 0; a < 3; ++a) c[a] = std::lround(bone.center[a]);
      for (auto z = c[0] - r; z <= c[0] + r; ++z)
        for (auto y = c[1] - r; y <= c[1] + r; ++y)
          for (auto x = c[2] - r; x <= c[2] + r; ++x)
            if (z >= 0 && y >= 0 && x >= 0 && z < std::ptrdiff_t(g.dims[0]) &&
                y < std::ptrdiff_t(g.dims[1]) && x < std::ptrdiff_t(g.dims[2]) &&
                labels.at(z, y, x) == bone.labels.bone_class)
              labels.at(z, y, x) = static_cast<std::uint8_t>(lc);
    }
  }

  SimulatedPrediction out;
  out.strays = inject_strays(labels, cfg.stray_class, cfg.stray_count, cfg.stray_min_distance_voxels, cfg.seed);

  // Lesion probabilities: high inside predicted lesions, low elsewhere.
  for (auto& v : out.lesion_probability) v = Volume(g, 0.0f);
  const CounterRng prob_rng(cfg.seed, Stream::Prediction, 1u << 24);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double u = CounterRng::to_unit(prob_rng.block((1ull << 40) + i)[0]);
    for (int b = 0; b < 3; ++b) {
      const bool hit = labels[i] == ph.bones[b].labels.lesion_class;
      out.lesion_probability[b][i] = static_cast<float>(hit ? 0.5 + 0.5 * u : 0.2 * u);
    }
  }
  out.labels = LabelMap(std::move(labels), ph.labels.num_classes());
  return out;
}

}  // namespace kneeseg

#endif  // KNEESEG_PHANTOM_HPP
