#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kinfluid/moments.hpp"

using namespace kinfluid;

namespace {
ScalingParamsD no_floor() {
  ScalingParamsD s;
  s.vel_floor = 0;
  return s;
}
}  // namespace

TEST(Moments, StandardMaxwellian) {
  const Grid g(4, 128, 0, 1, 8);
  const auto f = maxwellian(FieldD(FieldD::Ones(4)), FieldD(FieldD::Zero(4)), g);
  const auto m = compute_moments(f, g, no_floor());
  for (Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.rho(i), 1.0, 1e-12);
    EXPECT_NEAR(m.mom(i), 0.0, 1e-14);
    EXPECT_NEAR(m.stress(i), 1.0, 1e-12);
    EXPECT_NEAR(m.kin_energy(i), 0.5, 1e-12);
  }
}

TEST(Moments, ZeroDensityGivesZeroVelocity) {
  const Grid g(3, 16, 0, 1, 4);
  const auto m = compute_moments(PhaseFieldD(PhaseFieldD::Zero(3, 16)), g, ScalingParamsD{});
  EXPECT_TRUE((m.rho == 0).all());
  EXPECT_TRUE((m.mom == 0).all());
  EXPECT_TRUE((m.u == 0).all());
  EXPECT_TRUE((m.stress == 0).all());
}

TEST(Moments, ShiftByWholeCells) {
  // f(xi) = h(xi - a) with a = 3 dv: the first moment moves by rho a.
  const Grid g(1, 64, 0, 1, 8);
  PhaseFieldD h = PhaseFieldD::Zero(1, 64), f = PhaseFieldD::Zero(1, 64);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (Index j = 20; j < 40; ++j) h(0, j) = U(rng);
  for (Index j = 20; j < 40; ++j) f(0, j + 3) = h(0, j);
  const double a = 3 * g.dv();
  const auto mh = compute_moments(h, g, ScalingParamsD{});
  const auto mf = compute_moments(f, g, ScalingParamsD{});
  EXPECT_NEAR(mf.mom(0), mh.rho(0) * a + mh.mom(0), 1e-13);
}

TEST(Maxwellian, PeakAndVacuum) {
  const Grid g(2, 2, 0, 1, 1);  // xi = +-0.5
  FieldD rho(2), u(2);
  rho << 1, 0;
  u << 0.5, 0.0;
  const auto k = maxwellian(rho, u, g);
  EXPECT_NEAR(k.f(0, 1), 0.3989422804014327, 1e-15);
  EXPECT_EQ(k.f(1, 0), 0.0);
  EXPECT_EQ(k.f(1, 1), 0.0);
}

TEST(Maxwellian, MomentsRecovered) {
  const double umax = 1.5;
  const Grid g(5, 192, 0, 1, umax + 8);
  FieldD rho(5), u(5);
  rho << 0.5, 1.0, 1.7, 2.2, 3.1;
  u << -1.5, -0.3, 0.0, 0.77, 1.5;
  const auto m = compute_moments(maxwellian(rho, u, g), g, no_floor());
  for (Index i = 0; i < 5; ++i) {
    EXPECT_NEAR(m.rho(i), rho(i), 1e-12 * rho(i));
    EXPECT_NEAR(m.mom(i), rho(i) * u(i), 1e-12);
    EXPECT_NEAR(m.stress(i), rho(i), 1e-11 * rho(i));
  }
}

TEST(Maxwellian, QuadratureErrorDecaysAtLeastSecondOrder) {
  FieldD rho = FieldD::Constant(1, 1.3), u = FieldD::Constant(1, 0.37);
  std::vector<double> err;
  for (Index nv : {4, 8, 16}) {
    const Grid g(1, nv, 0, 1, 8);
    const auto m = compute_moments(maxwellian(rho, u, g), g, no_floor());
    err.push_back(std::abs(m.rho(0) - 1.3) + std::abs(m.mom(0) - 1.3 * 0.37) + std::abs(m.stress(0) - 1.3));
  }
  for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(std::log2(err[k - 1] / err[k]), 1.9);
}

TEST(Moments, GalileanStress) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  const Grid g(3, 32, 0, 1, 5);
  PhaseFieldD f(3, 32);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 32; ++j) f(i, j) = U(rng);
  const auto m = compute_moments(f, g, no_floor());
  const FieldD xi = g.xi_centers();
  for (Index i = 0; i < 3; ++i) {
    const double second = g.dv() * (xi.square() * f.row(i).transpose()).sum();
    EXPECT_NEAR(m.stress(i), second - m.rho(i) * m.u(i) * m.u(i), 1e-12 * second);
  }
}

TEST(Moments, LinearInF) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0, 1);
  const Grid g(2, 16, 0, 1, 3);
  PhaseFieldD a(2, 16), b(2, 16);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 16; ++j) {
      a(i, j) = U(rng);
      b(i, j) = U(rng);
    }
  const auto ma = compute_moments(a, g, ScalingParamsD{});
  const auto mb = compute_moments(b, g, ScalingParamsD{});
  const auto mab = compute_moments(PhaseFieldD(2 * a + 3 * b), g, ScalingParamsD{});
  EXPECT_TRUE(((mab.rho - (2 * ma.rho + 3 * mb.rho)).abs() < 1e-13).all());
  EXPECT_TRUE(((mab.mom - (2 * ma.mom + 3 * mb.mom)).abs() < 1e-13).all());
  EXPECT_TRUE(((mab.kin_energy - (2 * ma.kin_energy + 3 * mb.kin_energy)).abs() < 1e-12).all());
}

TEST(Truncation, Examples) {
  EXPECT_EQ(truncate_velocity(FieldD(FieldD::Constant(1, 0.5)), 1.0)(0), 0.5);
  EXPECT_EQ(truncate_velocity(FieldD(FieldD::Constant(1, 2.0)), 1.0)(0), 0.0);
  FieldD u(5);
  u << -3, -1, 0.2, 1.0000001, 4;
  const FieldD once = truncate_velocity(u, 1.0);
  EXPECT_TRUE((truncate_velocity(once, 1.0) == once).all());
  EXPECT_EQ(once(1), -1.0);
  EXPECT_EQ(once(3), 0.0);
}
