#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kinfluid/entropy.hpp"

using namespace kinfluid;

namespace {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(unsigned seed) : eng(seed) {}
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  FieldD field(Index n, double lo, double hi) {
    FieldD a(n);
    for (Index i = 0; i < n; ++i) a(i) = (*this)(lo, hi);
    return a;
  }
};

TwoPhaseStateD random_state(Rng& r, Index nx, double gamma) {
  TwoPhaseStateD st;
  st.rho = r.field(nx, 0.2, 3);
  st.u = r.field(nx, -2, 2);
  st.fluid.n = r.field(nx, 0.2, 3);
  st.fluid.v = r.field(nx, -2, 2);
  st.fluid.gamma = gamma;
  return st;
}

// E(bar) - E(ref) - DE(ref)(bar - ref) in the conserved variables (rho, rho u, n, n v),
// evaluated term by term without the relative-pressure helpers.
double bregman_of_e(const TwoPhaseStateD& bar, const TwoPhaseStateD& ref, const Grid& g) {
  const double gm = ref.fluid.gamma;
  double acc = 0;
  for (Index i = 0; i < bar.rho.size(); ++i) {
    const double r0 = ref.rho(i), u0 = ref.u(i), n0 = ref.fluid.n(i), v0 = ref.fluid.v(i);
    const double r1 = bar.rho(i), m1 = r1 * bar.u(i), n1 = bar.fluid.n(i), w1 = n1 * bar.fluid.v(i);
    const double m0 = r0 * u0, w0 = n0 * v0;
    auto E = [gm](double r, double m, double n, double w) {
      return m * m / (2 * r) + w * w / (2 * n) + r * std::log(r) + std::pow(n, gm) / (gm - 1);
    };
    const double dr = -u0 * u0 / 2 + std::log(r0) + 1, dm = u0;
    const double dn = -v0 * v0 / 2 + gm * std::pow(n0, gm - 1) / (gm - 1), dw = v0;
    acc += E(r1, m1, n1, w1) - E(r0, m0, n0, w0) - dr * (r1 - r0) - dm * (m1 - m0) - dn * (n1 - n0) -
           dw * (w1 - w0);
  }
  return g.dx() * acc;
}

}  // namespace

TEST(KineticEntropy, Examples) {
  const Grid g(8, 256, 0, 1, 8);
  const FluidStateD rest{FieldD::Ones(8), FieldD::Zero(8)};
  const auto m = maxwellian(FieldD(FieldD::Ones(8)), FieldD(FieldD::Zero(8)), g);
  EXPECT_NEAR(kinetic_entropy(m.f, rest, g), 0.081061466795327258, 1e-10);
  EXPECT_NEAR(kinetic_entropy(PhaseFieldD(PhaseFieldD::Zero(8, 256)), rest, g), 1.0, 1e-15);

  Rng r(1);
  FluidStateD fl{r.field(8, 0.5, 2), r.field(8, -1, 1)};
  FluidStateD flipped = fl;
  flipped.v = -fl.v;
  EXPECT_EQ(kinetic_entropy(m.f, fl, g), kinetic_entropy(m.f, flipped, g));
}

TEST(Dissipation, Examples) {
  const Grid g(4, 256, 0, 1, 8);
  FieldD rho(4), u(4);
  rho << 0.5, 1, 1.5, 2;
  u << -0.5, 0, 0.3, 1;
  ScalingParamsD s;
  s.vel_floor = 0;
  const auto m = maxwellian(rho, u, g);
  EXPECT_LT(dissipation_d1(m.f, g, s), 1e-3);
  EXPECT_EQ(dissipation_d1(PhaseFieldD(PhaseFieldD::Zero(4, 256)), g, s), 0.0);
  EXPECT_EQ(drag_dissipation(PhaseFieldD(PhaseFieldD::Zero(4, 256)), FieldD(FieldD::Ones(4)), g), 0.0);

  const auto m1 = maxwellian(FieldD(FieldD::Ones(4)), FieldD(FieldD::Zero(4)), g);
  EXPECT_NEAR(drag_dissipation(m1.f, FieldD(FieldD::Zero(4)), g), 1.0, 1e-10);
}

TEST(RelativePressure, ClosedForms) {
  EXPECT_EQ(relative_pressure(1.0, 1.0), 0.0);
  EXPECT_EQ(relative_pressure_tilde(1.7, 1.7, 2.4), 0.0);
  EXPECT_NEAR(relative_pressure(2.0, 1.0), 0.38629436111989062, 1e-15);
  EXPECT_NEAR(relative_pressure_tilde(2.0, 1.0, 2.0), 1.0, 1e-15);
  EXPECT_THROW(relative_pressure(1.0, 0.0), ConfigError);
  EXPECT_THROW(relative_pressure_tilde(1.0, -1.0, 2.0), ConfigError);
}

TEST(RelativePressure, IntegralFormMatches) {
  Rng r(2);
  for (int k = 0; k < 500; ++k) {
    const double x = r(1e-3, 10), y = r(1e-2, 10);
    EXPECT_NEAR(relative_pressure_by_quadrature(x, y), relative_pressure(x, y), 1e-10) << x << " " << y;
  }
}

TEST(RelativePressure, MinMaxInequality) {
  Rng r(3);
  for (int k = 0; k < 1000; ++k) {
    const double x = r(1e-3, 50), y = r(1e-3, 50);
    EXPECT_GE(std::min(1 / x, 1 / y) * (x + y), 1.0);
  }
}

TEST(PressureBounds, Diagonal) {
  const auto b = check_pressure_bounds(1.3, 1.3, 2.5, 0.5, 2.0);
  EXPECT_EQ(b.p, 0.0);
  EXPECT_EQ(b.margin_p, 0.0);
  EXPECT_EQ(b.pt, 0.0);
  EXPECT_EQ(b.margin_published, 0.0);
  EXPECT_EQ(b.margin_corrected, 0.0);
}

TEST(PressureBounds, QuotedMinFormIsNotABound) {
  // gamma = 2: P~ = (x - y)^2 while the min form gives 2 (x - y)^2.
  const auto b = check_pressure_bounds(2.0, 1.0, 2.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(b.pt, 1.0);
  EXPECT_DOUBLE_EQ(b.pt_min_form, 2.0);
  EXPECT_LT(b.margin_pt_min_form, 0.0);
  EXPECT_GE(b.margin_pt_taylor, 0.0);
  EXPECT_EQ(b.region, PressureRegion::Band);
  EXPECT_GE(b.margin_published, 0.0);
}

TEST(PressureBounds, PublishedConstantCounterexample) {
  // x below y/2 at y = y_min: the proof constant overshoots P~ by 0.041.
  const auto b = check_pressure_bounds(0.245, 0.5, 2.0, 0.5, 2.0);
  EXPECT_EQ(b.region, PressureRegion::Below);
  EXPECT_NEAR(b.pt, 0.065025, 1e-15);
  EXPECT_NEAR(b.margin_published, -0.0409775, 1e-12);
  EXPECT_NEAR(b.margin_corrected, 0.01202375, 1e-12);
}

TEST(PressureBounds, RandomSweepWithCorrectedConstants) {
  Rng r(4);
  for (int k = 0; k < 10000; ++k) {
    const double gamma = r(1.0 + 1e-6, 3.0);
    const double y_min = r(0.1, 2.0), y_max = y_min * r(1.0, 5.0);
    const double y = r(y_min, y_max), x = r(1e-9, 10.0);
    const auto b = check_pressure_bounds(x, y, gamma, y_min, y_max);
    ASSERT_GE(b.margin_p, -1e-12) << x << " " << y;
    ASSERT_GE(b.margin_pt_taylor, -1e-12) << x << " " << y << " " << gamma;
    ASSERT_GE(b.margin_corrected, -1e-12) << x << " " << y << " " << gamma << " " << y_min << " " << y_max;
  }
}

TEST(RelativeEntropy, Examples) {
  const Grid g(16, 2, 0, 1, 1);
  Rng r(5);
  const TwoPhaseStateD ref = random_state(r, 16, 2.0);
  EXPECT_EQ(relative_entropy(ref, ref, g), 0.0);
  TwoPhaseStateD bar = ref;
  bar.u += 0.3;
  EXPECT_NEAR(relative_entropy(bar, ref, g), quad_x(g, bar.rho) * 0.09 / 2, 1e-14);
}

TEST(RelativeEntropy, BregmanIdentity) {
  const Grid g(24, 2, 0, 1, 1);
  Rng r(6);
  for (int k = 0; k < 1000; ++k) {
    const double gamma = r(1.1, 3.0);
    const TwoPhaseStateD a = random_state(r, 24, gamma), b = random_state(r, 24, gamma);
    const double h = relative_entropy(a, b, g);
    EXPECT_NEAR(h, bregman_of_e(a, b, g), 1e-12 * std::max(1.0, std::abs(h)));
    EXPECT_GE(h, 0.0);
  }
}

TEST(MacroscopicEntropy, Examples) {
  const Grid g(10, 2, 0, 1, 1);
  TwoPhaseStateD st;
  st.rho = FieldD::Ones(10);
  st.u = FieldD::Zero(10);
  st.fluid.n = FieldD::Ones(10);
  st.fluid.v = FieldD::Zero(10);
  EXPECT_NEAR(macroscopic_entropy(st, g), 1.0, 1e-15);
  st.u = FieldD::Constant(10, 0.5);
  const double k1 = macroscopic_entropy(st, g) - 1.0;
  st.u *= 2;
  EXPECT_NEAR(macroscopic_entropy(st, g) - 1.0, 4 * k1, 1e-14);
}

TEST(RelativeFlux, Examples) {
  const Grid g(16, 2, 0, 1, 1);
  Rng r(7);
  const TwoPhaseStateD ref = random_state(r, 16, 2.0);
  EXPECT_EQ(relative_flux_l1(ref, ref, g), 0.0);
  TwoPhaseStateD bar = ref;
  bar.fluid.n += r.field(16, -0.1, 0.1);
  const double dn2 = quad_x(g, FieldD((bar.fluid.n - ref.fluid.n).square()));
  // One dimension: the pressure entry carries d (gamma - 1) = 1.
  EXPECT_NEAR(relative_flux_l1(bar, ref, g), dn2, 1e-15);
  EXPECT_NEAR(relative_entropy(bar, ref, g), dn2, 1e-15);
  EXPECT_EQ(relative_flux_constant(2.0), 2.0);
  EXPECT_EQ(relative_flux_constant(4.0), 3.0);
}

TEST(RelativeFlux, BoundedByRelativeEntropy) {
  const Grid g(16, 2, 0, 1, 1);
  Rng r(8);
  for (int k = 0; k < 1000; ++k) {
    const double gamma = r(1.05, 4.0);
    const TwoPhaseStateD a = random_state(r, 16, gamma), b = random_state(r, 16, gamma);
    EXPECT_GE(relative_flux_constant(gamma) * relative_entropy(a, b, g) - relative_flux_l1(a, b, g), -1e-12);
  }
}

TEST(MaxwellianGap, Examples) {
  const Grid g(4, 256, 0, 1, 10);
  FieldD rho(4), u(4);
  rho << 0.7, 1, 1.4, 2;
  u << -0.4, 0, 0.2, 0.9;
  const auto m = maxwellian(rho, u, g);
  EXPECT_LT(maxwellian_relative_entropy(m.f, rho, u, g), 1e-4);
  const double a = 0.35;
  const auto shifted = maxwellian(rho, FieldD(u + a), g);
  EXPECT_NEAR(maxwellian_relative_entropy(shifted.f, rho, u, g), quad_x(g, rho) * a * a / 2, 1e-10);
}

TEST(MaxwellianGap, CsiszarKullbackOnRandomData) {
  const Grid g(6, 64, 0, 1, 6);
  Rng r(9);
  for (int k = 0; k < 200; ++k) {
    PhaseFieldD f(6, 64);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 64; ++j) f(i, j) = r(0, 1) * std::exp(-0.1 * g.xi(j) * g.xi(j));
    const FieldD rho = r.field(6, 0.3, 3), u = r.field(6, -1, 1);
    const auto gap = maxwellian_gap(f, rho, u, g);
    EXPECT_GE(gap.rel_entropy, 0.0);
    EXPECT_GE(gap.ck_margin, 0.0);
  }
}

TEST(EntropyReport, NonnegativeParts) {
  const Grid g(8, 32, 0, 1, 6);
  Rng r(10);
  ScalingParamsD s;
  for (int k = 0; k < 50; ++k) {
    PhaseFieldD f(8, 32);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 32; ++j) f(i, j) = r(0.01, 1);
    const FluidStateD fl{r.field(8, 0.5, 2), r.field(8, -1, 1)};
    const TwoPhaseStateD ref = random_state(r, 8, 2.0);
    const auto rep = make_entropy_report(f, fl, g, s, 0.0, &ref);
    EXPECT_GE(rep.D1, 0.0);
    EXPECT_GE(rep.D2, 0.0);
    EXPECT_GE(rep.H, 0.0);
    EXPECT_GE(rep.P_f_M, 0.0);
    EXPECT_GE(rep.rel_flux_l1, 0.0);
    EXPECT_GE(rep.grad_v_sq, 0.0);
  }
}

TEST(Audit, EquilibriumSlackIsThreeTMass) {
  // No dissipation and constant F: the slack is exactly 3 t mass at every sample.
  std::vector<EntropyReportD> h;
  for (int k = 0; k <= 8; ++k) {
    EntropyReportD r;
    r.t = 0.125 * k;
    r.F = 0.42;
    r.mass = 2.0;
    h.push_back(r);
  }
  const auto a = entropy_inequality_audit(h, 0.1);
  ASSERT_EQ(a.slack_theorem.size(), h.size());
  for (std::size_t k = 0; k < h.size(); ++k) EXPECT_EQ(a.slack_theorem[k], 3 * h[k].t * 2.0);
  EXPECT_EQ(a.worst_slack_theorem, 0.0);
  EXPECT_EQ(a.inferred_c_modified, 0.0);
}

TEST(Audit, TrapezoidalDissipation) {
  // D1 / eps = 2 on [0, 1] with F falling by exactly that amount: sharp slack d t mass.
  std::vector<EntropyReportD> h;
  for (int k = 0; k <= 4; ++k) {
    EntropyReportD r;
    r.t = 0.25 * k;
    r.D1 = 0.2;
    r.F = 1.0 - 2.0 * r.t;
    r.mass = 1.0;
    h.push_back(r);
  }
  const auto a = entropy_inequality_audit(h, 0.1);
  EXPECT_NEAR(a.slack_theorem.back(), 3.0, 1e-15);
  EXPECT_NEAR(a.worst_slack_sharp, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(a.min_D1, 0.2);
}
