#include <gtest/gtest.h>

#include <set>

#include "kneeseg/augment.hpp"
#include "kneeseg/components.hpp"
#include "kneeseg/losses.hpp"
#include "kneeseg/metrics.hpp"
#include "kneeseg/phantom.hpp"
#include "support.hpp"

using namespace kneeseg;
using kneeseg::test::geom;

namespace {

PhantomConfig small_config(std::uint64_t seed) {
  PhantomConfig c;
  c.dims = {40, 72, 72};
  c.spacing = {1.12, 0.65, 0.65};  // same physical extent as the default
  c.seed = seed;
  return c;
}

std::set<int> label_set(const LabelMap& m) {
  std::set<int> s;
  for (std::uint8_t v : m.grid().values()) s.insert(v);
  return s;
}

}  // namespace

TEST(Phantom, DefaultHasAllTenClasses) {
  const Phantom ph = generate_phantom(PhantomConfig{});
  EXPECT_EQ(ph.image.dims(), (std::array<std::size_t, 3>{64, 128, 128}));
  EXPECT_EQ(label_set(ph.labels), (std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(ph.lesions.size(), 5u);
}

TEST(Phantom, SameSeedSameVolumesDifferentSeedDiffers) {
  const Phantom a = generate_phantom(small_config(4)), b = generate_phantom(small_config(4));
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(generate_phantom(small_config(5)).image, a.image);
}

TEST(Phantom, ZeroLesionCountHasNoLesionLabels) {
  PhantomConfig c = small_config(1);
  c.lesion_count = {0, 0, 0};
  const auto s = label_set(generate_phantom(c).labels);
  for (int l : {7, 8, 9}) EXPECT_FALSE(s.count(l));
}

TEST(Phantom, LesionFreeRateOneRemovesAllLesions) {
  PhantomConfig c = small_config(1);
  c.lesion_free_rate = 1.0;
  EXPECT_TRUE(generate_phantom(c).lesions.empty());
}

TEST(Phantom, LesionContrastMatchesDelta) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Phantom ph = generate_phantom(small_config(seed));
    for (const auto& b : LabelScheme::knee().bones) {
      double ls = 0.0, bs = 0.0;
      std::size_t ln = 0, bn = 0;
      for (std::size_t i = 0; i < ph.image.size(); ++i) {
        if (ph.labels[i] == b.lesion_class) {
          ls += ph.image[i];
          ++ln;
        } else if (ph.labels[i] == b.bone_class) {
          bs += ph.image[i];
          ++bn;
        }
      }
      if (!ln) continue;
      EXPECT_NEAR(ls / ln - bs / bn, 0.35, 2 * 0.02);
    }
  }
}

TEST(Phantom, LesionsSitInsideTheirBone) {
  const Phantom ph = generate_phantom(small_config(8));
  const auto& g = ph.labels.geometry();
  for (std::size_t i = 0; i < ph.labels.size(); ++i) {
    const int l = ph.labels[i];
    if (l < 7) continue;
    const int host = l == 7 ? 1 : l == 8 ? 3 : 5;
    const auto p = g.coords(i);
    // Every face neighbor is the host bone or the same lesion.
    for (int a = 0; a < 3; ++a)
      for (int s : {-1, 1}) {
        auto q = p;
        q[a] += s;
        const int n = ph.labels.grid().at(q[0], q[1], q[2]);
        ASSERT_TRUE(n == host || n == l);
      }
  }
}

TEST(Phantom, CartilageTouchesItsBone) {
  const Phantom ph = generate_phantom(small_config(2));
  for (const auto& b : LabelScheme::knee().bones) {
    const BinaryMask c = class_mask(ph.labels, b.cartilage_class);
    ASSERT_GT(count(c), 0u);
    const BinaryMask grown = dilate(class_mask(ph.labels, b.bone_class), 1);
    std::size_t touching = 0;
    for (std::size_t i = 0; i < c.size(); ++i) touching += c[i] && grown[i];
    EXPECT_GT(touching, 0u);
  }
}

TEST(Phantom, TooSmallGeometryThrows) {
  PhantomConfig c;
  c.dims = {16, 64, 64};
  EXPECT_THROW(generate_phantom(c), Error);
  c.dims = {64, 128, 128};
  c.lesion_free_rate = 1.5;
  EXPECT_THROW(generate_phantom(c), Error);
}

TEST(SimulateReconstruction, IdentityWithoutLesions) {
  PhantomConfig c = small_config(3);
  c.lesion_count = {0, 0, 0};
  const Phantom ph = generate_phantom(c);
  EXPECT_EQ(simulate_reconstruction(ph.image, ph.labels), ph.image);
}

TEST(SimulateReconstruction, ErrorConfinedToLesions) {
  const Phantom ph = generate_phantom(small_config(6));
  const Volume e = error_map(ph.image, simulate_reconstruction(ph.image, ph.labels));
  double in = 0.0, out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (ph.labels[i] >= 7) {
      in += e[i];
      ++n_in;
    } else {
      ASSERT_EQ(e[i], 0.0f);
      out += e[i];
      ++n_out;
    }
  }
  ASSERT_GT(n_in, 0u);
  EXPECT_GE(in / n_in, 10.0 * out / n_out);
}

TEST(SimulatePrediction, DefaultEqualsReference) {
  const Phantom ph = generate_phantom(small_config(7));
  const SimulatedPrediction p = simulate_prediction(ph, PredictionConfig{});
  EXPECT_EQ(p.labels, ph.labels);
  for (std::size_t i = 0; i < ph.labels.size(); ++i)
    for (int b = 0; b < 3; ++b) {
      const float v = p.lesion_probability[b][i];
      ASSERT_EQ(v >= 0.5f, ph.labels[i] == 7 + b);
    }
}

TEST(SimulatePrediction, StraysAreFarAndFiltered) {
  const Phantom ph = generate_phantom(PhantomConfig{});
  PredictionConfig cfg;
  cfg.seed = 9;
  cfg.stray_count = 3;
  const SimulatedPrediction p = simulate_prediction(ph, cfg);
  ASSERT_EQ(p.strays.size(), 3u);
  const BinaryMask femur = class_mask(ph.labels, 1);
  std::vector<std::array<std::size_t, 3>> pts;
  for (std::size_t i = 0; i < femur.size(); ++i)
    if (femur[i]) pts.push_back(femur.geometry().coords(i));
  for (const auto& s : p.strays) {
    double best = 1e300;
    for (const auto& q : pts) best = std::min(best, test::mm_distance(s, q, {1, 1, 1}));
    EXPECT_GT(best, 60.0);
  }
  const LabelMap pp = postprocess_labels(p.labels, {1});
  EXPECT_EQ(pp, ph.labels);
  const auto r = evaluate_case(pp, ph.labels, {1}, &p.labels);
  EXPECT_GT(*r[0].hd_pre_mm, *r[0].hd_mm);
}

TEST(SimulatePrediction, MissAndFalseRates) {
  PhantomConfig c = small_config(11);
  c.lesion_count = {1, 0, 0};
  const Phantom ph = generate_phantom(c);
  PredictionConfig cfg;
  cfg.lesion_miss_rate = 1.0;
  cfg.false_lesion_rate = 1.0;
  const SimulatedPrediction p = simulate_prediction(ph, cfg);
  EXPECT_EQ(count(class_mask(p.labels, 7)), 0u);
  EXPECT_GT(count(class_mask(p.labels, 8)), 0u);
  EXPECT_GT(count(class_mask(p.labels, 9)), 0u);
}

TEST(Augment, IdentityParametersReturnInputs) {
  const Phantom ph = generate_phantom(small_config(12));
  const auto [x, l] = apply_affine(ph.image, ph.labels, AffineParams{});
  EXPECT_EQ(x, ph.image);
  EXPECT_EQ(l, ph.labels);
  AugmentConfig cfg;
  cfg.scale_range = {1.0, 1.0};
  cfg.rotation_deg_max = 0.0;
  cfg.translation_vox_max = 0.0;
  const auto [x2, l2] = random_affine(ph.image, ph.labels, cfg);
  EXPECT_EQ(x2, ph.image);
  EXPECT_EQ(l2, ph.labels);
}

TEST(Augment, IntegerTranslationIsExactShift) {
  const Geometry g = geom(6, 7, 8, {0.7, 0.365, 0.365});
  CounterRng rng(13, Stream::Test);
  Volume x(g);
  Grid<std::uint8_t> l(g);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<float>(rng.uniform());
    l[i] = static_cast<std::uint8_t>(rng.uniform() * 10.0);
  }
  AffineParams p;
  p.translation_vox = {1.0, -2.0, 3.0};
  const auto [xs, ls] = apply_affine(x, LabelMap(l, 10), p);
  for (std::size_t z = 0; z < 6; ++z)
    for (std::size_t y = 0; y < 7; ++y)
      for (std::size_t xx = 0; xx < 8; ++xx) {
        const long sz = long(z) - 1, sy = long(y) + 2, sx = long(xx) - 3;
        const bool in = sz >= 0 && sz < 6 && sy >= 0 && sy < 7 && sx >= 0 && sx < 8;
        ASSERT_EQ(xs.at(z, y, xx), in ? x.at(sz, sy, sx) : 0.0f);
        ASSERT_EQ(ls.grid().at(z, y, xx), in ? l.at(sz, sy, sx) : 0);
      }
}

TEST(Augment, RandomTransformsCreateNoNewLabels) {
  const Phantom ph = generate_phantom(small_config(14));
  const auto before = label_set(ph.labels);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    AugmentConfig cfg;
    cfg.seed = seed;
    const auto [x, l] = random_affine(ph.image, ph.labels, cfg);
    for (int v : label_set(l)) EXPECT_TRUE(before.count(v));
    for (float v : x.values()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Augment, SamplesStayInRange) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    AugmentConfig cfg;
    cfg.seed = seed;
    const AffineParams p = sample_affine(cfg);
    ASSERT_GE(p.scale, 0.9);
    ASSERT_LE(p.scale, 1.1);
    ASSERT_LE(std::abs(p.angle_deg), 10.0);
    for (double t : p.translation_vox) ASSERT_LE(std::abs(t), 10.0);
    ASSERT_NEAR(p.axis[0] * p.axis[0] + p.axis[1] * p.axis[1] + p.axis[2] * p.axis[2], 1.0, 1e-12);
  }
  AugmentConfig bad;
  bad.scale_range = {1.2, 1.1};
  EXPECT_THROW(sample_affine(bad), Error);
}

TEST(Augment, RotationMatrixIsOrthonormal) {
  const Mat3 r = rotation_matrix({0.0, 0.6, 0.8}, 0.7);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[i][k] * r[j][k];
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
    }
}
