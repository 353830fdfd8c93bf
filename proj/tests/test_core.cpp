#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kinfluid/core.hpp"

using namespace kinfluid;

TEST(PhaseGrid, DerivedWidths) {
  const Grid g(10, 8, 0.0, 1.0, 4.0);
  EXPECT_DOUBLE_EQ(g.dx(), 0.1);
  EXPECT_DOUBLE_EQ(g.dv(), 1.0);
  EXPECT_EQ(Grid::dim(), 1);
  EXPECT_DOUBLE_EQ(g.x(0), 0.05);
  EXPECT_DOUBLE_EQ(g.xi(0), -3.5);
  EXPECT_DOUBLE_EQ(g.xi(7), 3.5);
  EXPECT_DOUBLE_EQ(g.xi_face(3), 0.0);
  EXPECT_EQ(Grid::normal(Wall::Lo), -1.0);
  EXPECT_EQ(Grid::normal(Wall::Hi), 1.0);
}

TEST(PhaseGrid, MirrorIsExactNegation) {
  // Odd spacing on purpose: the reflection must still be bit-exact.
  const Grid g(3, 130, -0.3, 0.7, 7.3);
  for (Index j = 0; j < g.nv(); ++j) EXPECT_EQ(g.xi(g.mirror(j)), -g.xi(j)) << j;
}

TEST(PhaseGrid, RejectsBadParameters) {
  EXPECT_THROW(Grid(0, 8, 0, 1, 4), ConfigError);
  EXPECT_THROW(Grid(4, 7, 0, 1, 4), ConfigError);
  EXPECT_THROW(Grid(4, 8, 1, 1, 4), ConfigError);
  EXPECT_THROW(Grid(4, 8, 0, 1, 0), ConfigError);
}

TEST(Quadrature, VelocityExamples) {
  const Grid g(1, 8, 0, 1, 4);
  EXPECT_DOUBLE_EQ(quad_v(g, FieldD::Ones(8)), 8.0);
  EXPECT_EQ(quad_v(g, FieldD::Zero(8)), 0.0);

  const Grid h(1, 256, 0, 1, 8);
  const FieldD xi = h.xi_centers();
  const FieldD gauss = (-xi.square() / 2).exp() / std::sqrt(2 * std::numbers::pi);
  // The exact mass on [-8, 8] is erf(8/sqrt 2), which is 1 to 1e-15.
  EXPECT_NEAR(quad_v(h, gauss), std::erf(8 / std::sqrt(2.0)), 1e-8);
}

TEST(Quadrature, SpatialExamples) {
  const Grid g(10, 2, 0, 1, 1);
  EXPECT_NEAR(quad_x(g, FieldD::Ones(10)), 1.0, 1e-15);
  EXPECT_EQ(quad_x(g, FieldD::Zero(10)), 0.0);
  const Grid h(128, 2, 0, 1, 1);
  const FieldD s = (2 * std::numbers::pi * h.x_centers()).sin();
  EXPECT_NEAR(quad_x(h, s), 0.0, 1e-12);
}

TEST(Quadrature, LinearAndMonotone) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0, 1);
  const Grid g(17, 12, 0, 2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    FieldD a(17), b(17);
    for (Index i = 0; i < 17; ++i) {
      a(i) = U(rng);
      b(i) = U(rng);
    }
    const double al = 2 * U(rng) - 1, be = 2 * U(rng) - 1;
    EXPECT_NEAR(quad_x(g, FieldD(al * a + be * b)), al * quad_x(g, a) + be * quad_x(g, b), 1e-14);
    EXPECT_GE(quad_x(g, a), 0.0);
  }
}

TEST(Distance, Examples) {
  const Grid g(10, 4, 0, 1, 2);
  FieldD a = FieldD::LinSpaced(10, -1, 3);
  EXPECT_EQ(l1_distance(g, a, a), 0.0);
  EXPECT_EQ(l2_distance(g, a, a), 0.0);
  const FieldD b = a + 0.25;
  EXPECT_NEAR(l1_distance(g, a, b), 0.25, 1e-15);
  EXPECT_NEAR(l2_distance(g, a, b), 0.25, 1e-15);
}

TEST(Distance, MatchesDirectSummation) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  const Grid g(6, 10, 0, 3, 5);
  PhaseFieldD a(6, 10), b(6, 10);
  double s1 = 0, s2 = 0;
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 10; ++j) {
      a(i, j) = N(rng);
      b(i, j) = N(rng);
      s1 += std::abs(a(i, j) - b(i, j));
      s2 += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    }
  const double w = 0.5 * 1.0;  // dx * dv
  EXPECT_NEAR(l1_distance(g, a, b), w * s1, 1e-13);
  EXPECT_NEAR(l2_distance(g, a, b), std::sqrt(w * s2), 1e-13);
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  const Grid g(20, 2, 0, 1, 1);
  for (int t = 0; t < 100; ++t) {
    FieldD a(20), b(20), c(20);
    for (Index i = 0; i < 20; ++i) {
      a(i) = N(rng);
      b(i) = N(rng);
      c(i) = N(rng);
    }
    EXPECT_LE(l2_distance(g, a, c), l2_distance(g, a, b) + l2_distance(g, b, c) + 1e-14);
  }
}

TEST(Distance, ShapeMismatchThrows) {
  const Grid g(10, 4, 0, 1, 2);
  EXPECT_THROW(l1_distance(g, FieldD::Zero(10), FieldD::Zero(9)), ShapeError);
  EXPECT_THROW(l2_distance(g, FieldD::Zero(7), FieldD::Zero(7)), ShapeError);
}

TEST(ScalingParams, Validation) {
  ScalingParamsD s;
  s.eps = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.eps = 0.1;
  s.vel_floor = -1;
  EXPECT_THROW(s.validate(), ConfigError);
}
