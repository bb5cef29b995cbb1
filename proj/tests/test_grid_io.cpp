#include <gtest/gtest.h>

#include <fstream>

#include "kneeseg/intensity.hpp"
#include "kneeseg/labels.hpp"
#include "kneeseg/metaimage.hpp"
#include "kneeseg/random.hpp"
#include "support.hpp"

using namespace kneeseg;
using kneeseg::test::geom;

TEST(Geometry, IndexAndCoordsAreInverse) {
  const Geometry g = geom(3, 4, 5);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const auto c = g.coords(i);
    EXPECT_EQ(g.index(c[0], c[1], c[2]), i);
  }
  EXPECT_EQ(g.index(0, 0, 1), 1u);
  EXPECT_EQ(g.index(1, 0, 0), 20u);
}

TEST(Geometry, RejectsZeroAxisAndBadSpacing) {
  EXPECT_THROW(Volume(geom(0, 2, 2)), Error);
  EXPECT_THROW(Volume(geom(2, 2, 2, {1.0, -1.0, 1.0})), Error);
}

TEST(MetaImage, RoundTripEightFloats) {
  const auto dir = test::temp_dir("mha_roundtrip");
  Geometry g = geom(2, 2, 2, {0.7, 0.365, 0.25});
  g.origin = {1.5, -2.0, 0.125};
  Volume v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1f * static_cast<float>(i) - 0.33f;
  for (const char* name : {"a.mha", "b.mhd"}) {
    write_volume(v, dir / name);
    const Volume r = read_volume(dir / name);
    EXPECT_EQ(r.geometry(), g);
    EXPECT_EQ(r, v);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "b.raw"));
}

TEST(MetaImage, LabelRoundTripKeepsUint8) {
  const auto dir = test::temp_dir("mha_labels");
  Grid<std::uint8_t> l(geom(3, 2, 4));
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<std::uint8_t>(i % 10);
  const LabelMap m(l, 10);
  write_volume(m, dir / "l.mha");
  EXPECT_EQ(read_labels(dir / "l.mha", 10), m);
  EXPECT_THROW(read_labels(dir / "l.mha", 5), Error);
}

TEST(MetaImage, TruncatedPayloadIsSizeMismatch) {
  const auto dir = test::temp_dir("mha_short");
  {
    std::ofstream out(dir / "short.mha", std::ios::binary);
    out << "NDims = 3\nDimSize = 2 2 2\nElementType = MET_FLOAT\nElementDataFile = LOCAL\n";
    const float four[4] = {1, 2, 3, 4};
    out.write(reinterpret_cast<const char*>(four), sizeof four);
  }
  try {
    read_volume(dir / "short.mha");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("payload size mismatch"), std::string::npos);
  }
}

TEST(MetaImage, MalformedHeaderAndUnsupportedType) {
  const auto dir = test::temp_dir("mha_bad");
  {
    std::ofstream out(dir / "nodim.mha");
    out << "NDims = 3\nElementType = FLOAT32\nElementDataFile = LOCAL\n";
  }
  EXPECT_THROW(read_volume(dir / "nodim.mha"), Error);
  {
    std::ofstream out(dir / "i16.mha");
    out << "NDims = 3\nDimSize = 1 1 1\nElementType = MET_SHORT\nElementDataFile = LOCAL\n";
  }
  EXPECT_THROW(read_volume(dir / "i16.mha"), Error);
  EXPECT_THROW(read_volume(dir / "missing.mha"), Error);
}

TEST(MetaImage, RejectsNonFiniteOnWrite) {
  Volume v(geom(1, 1, 2));
  v[1] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(write_volume(v, test::temp_dir("mha_nan") / "x.mha"), Error);
}

TEST(ZNormalize, ConstantVolumeThrows) {
  EXPECT_THROW(z_normalize(Volume(geom(2, 2, 2), 3.0f)), Error);
}

TEST(ZNormalize, MinusOneOneMapsToPointFourPointSix) {
  Volume v(geom(1, 1, 2));
  v[0] = -1.0f;
  v[1] = 1.0f;
  const Volume r = z_normalize(v);
  EXPECT_FLOAT_EQ(r[0], 0.4f);
  EXPECT_FLOAT_EQ(r[1], 0.6f);
}

TEST(ZNormalize, TenSigmaOutlierClipsToOne) {
  // One outlier among 101 voxels sits exactly sqrt(100) = 10 sigma above the mean.
  Volume v(geom(1, 1, 101), 0.0f);
  v[50] = 7.0f;
  const Volume r = z_normalize(v);
  EXPECT_EQ(r[50], 1.0f);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_GE(r[i], 0.0f);
    EXPECT_LE(r[i], 1.0f);
  }
}

TEST(ZNormalize, MaskRestrictsStatistics) {
  Volume v(geom(1, 1, 4));
  v[0] = -1.0f;
  v[1] = 1.0f;
  v[2] = 100.0f;
  v[3] = 0.0f;
  BinaryMask m(v.geometry());
  m[0] = m[1] = 1;
  const Volume r = z_normalize(v, &m);
  EXPECT_FLOAT_EQ(r[0], 0.4f);
  EXPECT_FLOAT_EQ(r[3], 0.5f);
  EXPECT_EQ(r[2], 1.0f);
  const BinaryMask empty(v.geometry());
  EXPECT_THROW(z_normalize(v, &empty), Error);
}

TEST(OneHot, SingleVoxelLabelThree) {
  Grid<std::uint8_t> g(geom(1, 1, 1), 3);
  const ProbabilityMap p = one_hot(LabelMap(g, 5), 5);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(p(0, k), k == 3 ? 1.0f : 0.0f);
}

TEST(OneHot, LabelAtOrAboveKThrows) {
  Grid<std::uint8_t> g(geom(1, 1, 1), 7);
  EXPECT_THROW(one_hot(LabelMap(g, 10), 5), Error);
}

TEST(OneHot, ArgmaxInvertsOneHot) {
  CounterRng rng(11, Stream::Test);
  for (int trial = 0; trial < 20; ++trial) {
    Grid<std::uint8_t> g(geom(3, 4, 5));
    for (auto& v : g.values()) v = static_cast<std::uint8_t>(rng.uniform() * 10.0);
    const LabelMap m(g, 10);
    const ProbabilityMap p = one_hot(m, 10);
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(argmax_labels(p), m);
  }
}

TEST(Argmax, PicksMaximumAndBreaksTiesLow) {
  ProbabilityMap p(geom(1, 1, 2), 3);
  p(0, 0) = 0.1f;
  p(0, 1) = 0.7f;
  p(0, 2) = 0.2f;
  p(1, 0) = 0.5f;
  p(1, 1) = 0.5f;
  const LabelMap m = argmax_labels(p);
  EXPECT_EQ(m[0], 1);
  EXPECT_EQ(m[1], 0);
}

TEST(ProbabilityMap, ValidateRejectsOffSimplex) {
  ProbabilityMap p(geom(1, 1, 1), 2);
  p(0, 0) = 0.7f;
  p(0, 1) = 0.7f;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Philox, KnownAnswerVectors) {
  // Reference outputs of Philox4x32-10 from the Random123 distribution.
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (Philox4x32{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}),
            (Philox4x32{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (Philox4x32{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UniformMomentsAndStreamIndependence) {
  CounterRng a(5, Stream::Test), b(5, Stream::Augment);
  double sum = 0.0, sq = 0.0;
  int same = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
    same += u == b.uniform();
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
  EXPECT_EQ(same, 0);
}

TEST(LabelScheme, KneeLayout) {
  const LabelScheme s = LabelScheme::knee();
  EXPECT_EQ(s.num_classes, 10);
  EXPECT_EQ(s.structure_classes(), (std::vector<int>{1, 2, 3, 4, 5, 6}));
  ASSERT_EQ(s.bones.size(), 3u);
  EXPECT_EQ(s.bones[2].lesion_class, 9);
  EXPECT_EQ(s.name(7), "femoral_lesion");
  EXPECT_EQ(s.name(42), "class_42");
}
