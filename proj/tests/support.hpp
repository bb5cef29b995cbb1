#ifndef KNEESEG_TESTS_SUPPORT_HPP
#define KNEESEG_TESTS_SUPPORT_HPP

// Shared fixtures and brute-force oracles for the unit tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "kneeseg/grid.hpp"
#include "kneeseg/random.hpp"

namespace kneeseg::test {

inline Geometry geom(std::size_t nz, std::size_t ny, std::size_t nx,
                     std::array<double, 3> spacing = {1.0, 1.0, 1.0}) {
  Geometry g;
  g.dims = {nz, ny, nx};
  g.spacing = spacing;
  return g;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path(KNEESEG_TEST_TMP) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Random blob mask: a few random boxes plus salt, so masks have several
/// components, holes and voxels on the array border.
inline BinaryMask random_mask(const Geometry& g, CounterRng& rng, double salt = 0.02) {
  BinaryMask m(g);
  const auto& d = g.dims;
  const int boxes = 1 + static_cast<int>(rng.uniform() * 3.0);
  for (int b = 0; b < boxes; ++b) {
    std::array<std::size_t, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = static_cast<std::size_t>(rng.uniform() * static_cast<double>(d[a]));
      hi[a] = std::min(d[a], lo[a] + 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(d[a]) / 2.0));
    }
    for (std::size_t z = lo[0]; z < hi[0]; ++z)
      for (std::size_t y = lo[1]; y < hi[1]; ++y)
        for (std::size_t x = lo[2]; x < hi[2]; ++x) m[g.index(z, y, x)] = 1;
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    if (rng.uniform() < salt) m[i] = static_cast<std::uint8_t>(1 - m[i]);
  return m;
}

/// Boundary voxels by direct neighbor inspection: foreground with a 6-neighbor
/// that is background or outside the array.
inline std::vector<std::array<std::size_t, 3>> naive_boundary(const BinaryMask& m) {
  std::vector<std::array<std::size_t, 3>> out;
  const auto& d = m.dims();
  for (std::size_t z = 0; z < d[0]; ++z)
    for (std::size_t y = 0; y < d[1]; ++y)
      for (std::size_t x = 0; x < d[2]; ++x) {
        if (!m.at(z, y, x)) continue;
        bool edge = false;
        const long p[3] = {long(z), long(y), long(x)};
        for (int a = 0; a < 3 && !edge; ++a)
          for (int s : {-1, 1}) {
            long q[3] = {p[0], p[1], p[2]};
            q[a] += s;
            if (q[a] < 0 || q[a] >= long(d[a]) || !m.at(q[0], q[1], q[2])) {
              edge = true;
              break;
            }
          }
        if (edge) out.push_back({z, y, x});
      }
  return out;
}

inline double mm_distance(const std::array<std::size_t, 3>& a, const std::array<std::size_t, 3>& b,
                          const std::array<double, 3>& sp) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double dd = (double(a[k]) - double(b[k])) * sp[k];
    s += dd * dd;
  }
  return std::sqrt(s);
}

struct NaiveSurface {
  double asd = 0.0;
  double hd = 0.0;
};

/// All-pairs surface distances between the two boundaries.
inline NaiveSurface naive_surface(const BinaryMask& a, const BinaryMask& b) {
  const auto ba = naive_boundary(a), bb = naive_boundary(b);
  const auto& sp = a.geometry().spacing;
  double sum = 0.0, hd = 0.0;
  auto directed = [&](const auto& from, const auto& to) {
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, mm_distance(p, q, sp));
      sum += best;
      hd = std::max(hd, best);
    }
  };
  directed(ba, bb);
  directed(bb, ba);
  return {sum / static_cast<double>(ba.size() + bb.size()), hd};
}

/// Union-find labeling; returns a component count and, per voxel, a root
/// representative (0 for background, else root index + 1).
struct NaiveComponents {
  std::size_t count = 0;
  std::vector<std::size_t> root;
  std::vector<std::size_t> sizes;  // descending
};

inline NaiveComponents naive_components(const BinaryMask& m, int connectivity) {
  const auto& d = m.dims();
  std::vector<std::size_t> parent(m.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t z = 0; z < d[0]; ++z)
    for (std::size_t y = 0; y < d[1]; ++y)
      for (std::size_t x = 0; x < d[2]; ++x) {
        const std::size_t i = m.geometry().index(z, y, x);
        if (!m[i]) continue;
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int nz = std::abs(dz) + std::abs(dy) + std::abs(dx);
              if (nz == 0) continue;
              if (connectivity == 6 && nz > 1) continue;
              if (connectivity == 18 && nz > 2) continue;
              const long q[3] = {long(z) + dz, long(y) + dy, long(x) + dx};
              if (q[0] < 0 || q[1] < 0 || q[2] < 0 || q[0] >= long(d[0]) || q[1] >= long(d[1]) ||
                  q[2] >= long(d[2]))
                continue;
              const std::size_t j = m.geometry().index(q[0], q[1], q[2]);
              if (m[j]) parent[find(i)] = find(j);
            }
      }
  NaiveComponents out;
  out.root.assign(m.size(), 0);
  std::vector<std::size_t> size(m.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) {
      const std::size_t r = find(i);
      out.root[i] = r + 1;
      if (size[r]++ == 0) ++out.count;
    }
  for (std::size_t s : size)
    if (s) out.sizes.push_back(s);
  std::sort(out.sizes.rbegin(), out.sizes.rend());
  return out;
}

}  // namespace kneeseg::test

#endif  // KNEESEG_TESTS_SUPPORT_HPP
