#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dmaloc/errors.hpp"
#include "dmaloc/geometry.hpp"
#include "oracles.hpp"

namespace {

using namespace dmaloc;
constexpr double kPi = std::numbers::pi;

DmaGeometry panel() { return DmaGeometry::uniform(4, 8, 1.25e-3, 0.5e-3, 0.0, 2500.0); }

TEST(Geometry, ElementPositions) {
  const DmaGeometry g = panel();
  const Vec3 a = element_position(g, {1, 1});
  EXPECT_EQ(a.x, 0.0);
  EXPECT_EQ(a.z, 0.0);
  const Vec3 b = element_position(g, {2, 1});
  EXPECT_DOUBLE_EQ(b.x, 1.25e-3);
  const Vec3 c = element_position(g, {3, 5});
  EXPECT_DOUBLE_EQ(c.x, 2.5e-3);
  EXPECT_DOUBLE_EQ(c.y, 0.0);
  EXPECT_DOUBLE_EQ(c.z, 2.0e-3);
}

TEST(Geometry, FlatIndexRoundTrip) {
  const DmaGeometry g = panel();
  for (std::size_t k = 0; k < static_cast<std::size_t>(g.total_elements()); ++k) {
    EXPECT_EQ(g.flat_index(g.element_at(k)), k);
  }
  EXPECT_EQ(g.flat_index({2, 3}), 10u);
  EXPECT_THROW(g.flat_index({5, 1}), ConfigError);
  EXPECT_THROW(g.flat_index({1, 0}), ConfigError);
}

TEST(Geometry, OriginElementDistanceIsRange) {
  const DmaGeometry g = panel();
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const UePosition ue{oracle::uniform(rng, 0.5, 12), oracle::uniform(rng, 0, kPi), oracle::uniform(rng, -3, 3)};
    EXPECT_NEAR(ue_element_distance(g, ue, {1, 1}), ue.r, 1e-14 * ue.r);
  }
}

TEST(Geometry, CollinearDistance) {
  const DmaGeometry g = panel();
  const UePosition ue{2.0, kPi / 2, 0.0};
  for (int i = 1; i <= 4; ++i) EXPECT_NEAR(ue_element_distance(g, ue, {i, 1}), 2.0 - (i - 1) * g.d_rf, 1e-14);
}

TEST(Geometry, DistanceMatchesCartesianOracle) {
  const DmaGeometry g = panel();
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const UePosition ue{oracle::uniform(rng, 0.2, 12), oracle::uniform(rng, 0, kPi), oracle::uniform(rng, -3, 3)};
    const int i = 1 + t % 4, n = 1 + t % 8;
    const double want = oracle::distance(g, ue, i, n);
    EXPECT_NEAR(ue_element_distance(g, ue, {i, n}), want, 1e-12 * want);
  }
}

TEST(Geometry, DistanceSymmetricInAzimuth) {
  const DmaGeometry g = panel();
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const UePosition ue{oracle::uniform(rng, 0.2, 12), oracle::uniform(rng, 0, kPi), oracle::uniform(rng, 0.1, 3)};
    const UePosition mirror{ue.r, ue.theta, -ue.phi};
    const ElementIndex idx{1 + t % 4, 1 + t % 8};
    EXPECT_NEAR(ue_element_distance(g, ue, idx), ue_element_distance(g, mirror, idx), 1e-14 * ue.r);
  }
}

TEST(Geometry, Elevation) {
  const DmaGeometry g = panel();
  EXPECT_NEAR(ue_element_elevation(g, {3.0, kPi / 2, 0.4}, {2, 1}), 0.0, 1e-15);
  // Straight above element (1, n) along z.
  const UePosition above{1.0, 0.0, 0.0};
  EXPECT_NEAR(ue_element_elevation(g, above, {1, 3}), kPi / 2, 1e-12);
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const UePosition ue{oracle::uniform(rng, 0.2, 12), oracle::uniform(rng, 0, kPi), oracle::uniform(rng, -3, 3)};
    const int n = 1 + t % 8;
    const double d = oracle::distance(g, ue, 1 + t % 4, n);
    const double want = std::asin(std::abs((n - 1) * g.d_e - ue.r * std::cos(ue.theta)) / d);
    const double got = ue_element_elevation(g, ue, {1 + t % 4, n});
    EXPECT_NEAR(got, want, 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, kPi / 2);
  }
}

TEST(Geometry, CoincidentUeIsDegenerate) {
  const DmaGeometry g = panel();
  const UePosition on_element{2.0e-3, 0.0, 0.0};  // (n = 5) sits at z = 2 mm
  EXPECT_THROW(ue_element_elevation(g, on_element, {1, 5}), DegenerateGeometry);
}

TEST(Geometry, Validation) {
  EXPECT_THROW(DmaGeometry::uniform(0, 4, 1e-3, 1e-3, 0, 1), ConfigError);
  EXPECT_THROW(DmaGeometry::uniform(2, 4, -1e-3, 1e-3, 0, 1), ConfigError);
  EXPECT_THROW(DmaGeometry::uniform(2, 4, 1e-3, 1e-3, -1, 1), ConfigError);
  EXPECT_THROW((UePosition{-1.0, 0.1, 0.1}.validate()), ConfigError);
  EXPECT_THROW((UePosition{1.0, 4.0, 0.1}.validate()), ConfigError);
}

TEST(Geometry, Diagonal) {
  const DmaGeometry g = DmaGeometry::uniform(4, 5, 0.3, 0.4, 0, 1);
  EXPECT_NEAR(g.diagonal(), std::hypot(0.9, 1.6), 1e-15);
}

}  // namespace
