#ifndef KNEESEG_GRID_HPP
#define KNEESEG_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kneeseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis order everywhere is (z, y, x); x varies fastest in memory.
struct Geometry {
  std::array<std::size_t, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

  std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * dims[1] + y) * dims[2] + x;
  }
  std::array<std::size_t, 3> coords(std::size_t i) const {
    const std::size_t x = i % dims[2];
    const std::size_t rest = i / dims[2];
    return {rest / dims[1], rest % dims[1], x};
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] == 0) throw Error("geometry: zero-length axis");
      if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
        throw Error("geometry: spacing must be positive and finite");
      if (!std::isfinite(origin[a])) throw Error("geometry: origin must be finite");
    }
  }

  // Spacing and origin are compared exactly; they come from the same header.
  bool operator==(const Geometry&) const = default;
};

inline void require_same_geometry(const Geometry& a, const Geometry& b, const char* what) {
  if (a.dims != b.dims || a.spacing != b.spacing)
    throw Error(std::string(what) + ": geometry mismatch");
}

/// Dense scalar field over a Geometry.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(Geometry g, T fill = T{}) : geom_(std::move(g)) {
    geom_.validate();
    data_.assign(geom_.voxel_count(), fill);
  }
  Grid(Geometry g, std::vector<T> values) : geom_(std::move(g)), data_(std::move(values)) {
    geom_.validate();
    if (data_.size() != geom_.voxel_count()) throw Error("grid: value count does not match dims");
  }

  const Geometry& geometry() const { return geom_; }
  const std::array<std::size_t, 3>& dims() const { return geom_.dims; }
  const std::array<double, 3>& spacing() const { return geom_.spacing; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t z, std::size_t y, std::size_t x) { return data_[geom_.index(z, y, x)]; }
  const T& at(std::size_t z, std::size_t y, std::size_t x) const {
    return data_[geom_.index(z, y, x)];
  }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  Geometry geom_;
  std::vector<T> data_;
};

using Volume = Grid<float>;
/// Voxels are 0 or 1.
using BinaryMask = Grid<std::uint8_t>;
using DistanceMap = Grid<double>;

inline void require_finite(const Volume& v, const char* what) {
  for (float f : v.values())
    if (!std::isfinite(f)) throw Error(std::string(what) + ": non-finite voxel value");
}

/// Integer class labels in [0, num_classes).
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(Grid<std::uint8_t> labels, int num_classes)
      : labels_(std::move(labels)), num_classes_(num_classes) {
    if (num_classes_ < 1 || num_classes_ > 256) throw Error("label map: invalid class count");
    for (std::uint8_t l : labels_.values())
      if (l >= num_classes_)
        throw Error("label map: label " + std::to_string(l) + " >= class count " +
                    std::to_string(num_classes_));
  }

  const Geometry& geometry() const { return labels_.geometry(); }
  const std::array<std::size_t, 3>& dims() const { return labels_.dims(); }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return labels_.size(); }
  std::uint8_t operator[](std::size_t i) const { return labels_[i]; }
  const Grid<std::uint8_t>& grid() const { return labels_; }

  bool operator==(const LabelMap&) const = default;

 private:
  Grid<std::uint8_t> labels_;
  int num_classes_ = 1;
};

inline BinaryMask class_mask(const LabelMap& m, int cls) {
  BinaryMask out(m.geometry());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] == cls ? 1 : 0;
  return out;
}

template <class Range>
BinaryMask union_mask(const LabelMap& m, const Range& classes) {
  BinaryMask out(m.geometry());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (int c : classes)
      if (m[i] == c) {
        out[i] = 1;
        break;
      }
  return out;
}

inline std::size_t count(const BinaryMask& m) {
  std::size_t n = 0;
  for (std::uint8_t v : m.values()) n += v != 0;
  return n;
}

/// Per-voxel class probabilities, stored channel-major (channel k occupies
/// [k * voxels, (k + 1) * voxels)).
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(Geometry g, int num_classes)
      : geom_(std::move(g)), num_classes_(num_classes) {
    geom_.validate();
    if (num_classes_ < 1) throw Error("probability map: invalid class count");
    data_.assign(geom_.voxel_count() * static_cast<std::size_t>(num_classes_), 0.0f);
  }

  const Geometry& geometry() const { return geom_; }
  int num_classes() const { return num_classes_; }
  std::size_t voxel_count() const { return geom_.voxel_count(); }

  float& operator()(std::size_t voxel, int k) { return data_[k * voxel_count() + voxel]; }
  float operator()(std::size_t voxel, int k) const { return data_[k * voxel_count() + voxel]; }

  const float* channel(int k) const { return data_.data() + k * voxel_count(); }
  float* channel(int k) { return data_.data() + k * voxel_count(); }

  /// Throws unless every voxel lies on the probability simplex within `tol`.
  void validate(double tol = 1e-5) const {
    const std::size_t n = voxel_count();
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int k = 0; k < num_classes_; ++k) {
        const float p = (*this)(i, k);
        if (!std::isfinite(p) || p < 0.0f || p > 1.0f)
          throw Error("probability map: value outside [0, 1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol) throw Error("probability map: channels do not sum to 1");
    }
  }

 private:
  Geometry geom_;
  int num_classes_ = 0;
  std::vector<float> data_;
};

inline ProbabilityMap one_hot(const LabelMap& m, int num_classes) {
  ProbabilityMap out(m.geometry(), num_classes);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] >= num_classes)
      throw Error("one_hot: label " + std::to_string(m[i]) + " >= K=" + std::to_string(num_classes));
    out(i, m[i]) = 1.0f;
  }
  return out;
}

/// Ties go to the lowest channel index.
inline LabelMap argmax_labels(const ProbabilityMap& u) {
  Grid<std::uint8_t> labels(u.geometry());
  for (std::size_t i = 0; i < u.voxel_count(); ++i) {
    int best = 0;
    for (int k = 1; k < u.num_classes(); ++k)
      if (u(i, k) > u(i, best)) best = k;
    labels[i] = static_cast<std::uint8_t>(best);
  }
  return LabelMap(std::move(labels), u.num_classes());
}

}  // namespace kneeseg

#endif  // KNEESEG_GRID_HPP
