#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "kinfluid/core.hpp"
#include "kinfluid/fluid.hpp"
#include "kinfluid/moments.hpp"

namespace kinfluid {

namespace detail {

template <std::floating_point Scalar>
Scalar xlogx(Scalar x) {
  return x > Scalar(0) ? x * std::log(x) : Scalar(0);
}

template <typename Derived>
auto xlogx(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (x > Scalar(0)).select(x * x.max(std::numeric_limits<Scalar>::min()).log(), Scalar(0));
}

// Cells below this are left out of the 1/f weight in D1.
template <typename Scalar>
constexpr Scalar f_floor() {
  return Scalar(1e-300);
}

}  // namespace detail

// int int f (log f + xi^2 / 2) + int (n v^2 / 2 + n^gamma / (gamma - 1)).
template <typename Scalar>
Scalar kinetic_entropy(const PhaseField<Scalar>& f, const FluidState<Scalar>& fl,
                       const PhaseGrid<Scalar>& grid) {
  detail::require_phase_shape(f, grid, "kinetic_entropy");
  detail::require_fluid_shape(fl, grid, "kinetic_entropy");
  const Field<Scalar> half_xi2 = grid.xi_centers().square() / Scalar(2);
  Scalar s = 0;
  for (Index j = 0; j < grid.nv(); ++j)
    s += (detail::xlogx(f.col(j)) + half_xi2(j) * f.col(j)).sum();
  return grid.dx() * grid.dv() * s + fluid_energy(fl, grid);
}

// int (1/f) |f_xi - (u - xi) f|^2 with u the bulk velocity of f and central
// differences in xi (one-sided at +-v_max).
template <typename Scalar>
Scalar dissipation_d1(const PhaseField<Scalar>& f, const PhaseGrid<Scalar>& grid,
                      const ScalingParams<Scalar>& s) {
  detail::require_phase_shape(f, grid, "dissipation_d1");
  const Field<Scalar> u = compute_moments(f, grid, s).u;
  const Index nv = grid.nv();
  const Scalar dv = grid.dv();
  Scalar acc = 0;
  for (Index i = 0; i < grid.nx(); ++i) {
    for (Index j = 0; j < nv; ++j) {
      const Scalar fij = f(i, j);
      if (fij < detail::f_floor<Scalar>()) continue;
      Scalar df;
      if (nv == 1)
        df = 0;
      else if (j == 0)
        df = (f(i, 1) - f(i, 0)) / dv;
      else if (j == nv - 1)
        df = (f(i, nv - 1) - f(i, nv - 2)) / dv;
      else
        df = (f(i, j + 1) - f(i, j - 1)) / (Scalar(2) * dv);
      const Scalar r = df - (u(i) - grid.xi(j)) * fij;
      acc += r * r / fij;
    }
  }
  return grid.dx() * dv * acc;
}

// int int |v - xi|^2 f, the drag part of D2.
template <typename Scalar>
Scalar drag_dissipation(const PhaseField<Scalar>& f, const Field<Scalar>& v,
                        const PhaseGrid<Scalar>& grid) {
  detail::require_phase_shape(f, grid, "drag_dissipation");
  detail::require_size(v, grid.nx(), "drag_dissipation v");
  Scalar acc = 0;
  for (Index j = 0; j < grid.nv(); ++j) acc += ((v - grid.xi(j)).square() * f.col(j)).sum();
  return grid.dx() * grid.dv() * acc;
}

template <typename Scalar>
Scalar dissipation_d2(const PhaseField<Scalar>& f, const FluidState<Scalar>& fl,
                      const PhaseGrid<Scalar>& grid) {
  return drag_dissipation(f, fl.v, grid) + velocity_gradient_sq(fl.v, grid);
}

// P(x|y) = x log x - y log y + (y - x)(1 + log y).
template <typename Scalar>
Scalar relative_pressure(Scalar x, Scalar y) {
  if (!(y > Scalar(0))) throw ConfigError("relative_pressure: y must be positive");
  if (!(x >= Scalar(0))) throw ConfigError("relative_pressure: x must be nonnegative");
  // Same value as the definition, written so that it vanishes exactly at x = y.
  const Scalar head = x > Scalar(0) ? x * std::log(x / y) : Scalar(0);
  return head - (x - y);
}

// P~(x|y) = (x^g - y^g)/(g - 1) + g (y - x) y^(g-1) / (g - 1).
template <typename Scalar>
Scalar relative_pressure_tilde(Scalar x, Scalar y, Scalar gamma) {
  if (!(y > Scalar(0))) throw ConfigError("relative_pressure_tilde: y must be positive");
  if (!(x >= Scalar(0))) throw ConfigError("relative_pressure_tilde: x must be nonnegative");
  if (!(gamma > Scalar(1))) throw ConfigError("relative_pressure_tilde: gamma must exceed 1");
  return (std::pow(x, gamma) - std::pow(y, gamma)) / (gamma - Scalar(1)) +
         gamma * (y - x) * std::pow(y, gamma - Scalar(1)) / (gamma - Scalar(1));
}

// Elementwise versions used by the field functionals.
template <typename Scalar>
Field<Scalar> relative_pressure(const Field<Scalar>& x, const Field<Scalar>& y) {
  if ((y <= Scalar(0)).any()) throw ConfigError("relative_pressure: y must be positive");
  const Field<Scalar> head =
      (x > Scalar(0)).select(x * (x.max(std::numeric_limits<Scalar>::min()) / y).log(), Scalar(0));
  return head - (x - y);
}

template <typename Scalar>
Field<Scalar> relative_pressure_tilde(const Field<Scalar>& x, const Field<Scalar>& y,
                                      Scalar gamma) {
  if ((y <= Scalar(0)).any()) throw ConfigError("relative_pressure_tilde: y must be positive");
  const Scalar g1 = gamma - Scalar(1);
  return (x.pow(gamma) - y.pow(gamma)) / g1 + gamma * (y - x) * y.pow(g1) / g1;
}

// P(x|y) as the integral of (x - z)/z from y to x, by composite Gauss-Legendre
// in log z. Independent of the closed form; x must be positive.
template <typename Scalar>
Scalar relative_pressure_by_quadrature(Scalar x, Scalar y, int panels = 64) {
  if (!(x > Scalar(0)) || !(y > Scalar(0)))
    throw ConfigError("relative_pressure_by_quadrature: x and y must be positive");
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                      0.5384693101056831, 0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665,
                                        0.5688888888888889, 0.4786286704993665,
                                        0.2369268850561891};
  const Scalar a = std::log(y), b = std::log(x);
  const Scalar h = (b - a) / Scalar(panels);
  Scalar acc = 0;
  for (int p = 0; p < panels; ++p) {
    const Scalar mid = a + (Scalar(p) + Scalar(0.5)) * h;
    for (int q = 0; q < 5; ++q) {
      const Scalar s = mid + Scalar(0.5) * h * Scalar(nodes[q]);
      // (x - z)/z dz with z = e^s, dz = z ds
      acc += Scalar(weights[q]) * (x - std::exp(s));
    }
  }
  return Scalar(0.5) * h * acc;
}

enum class PressureRegion { Band, Above, Below };  // y/2 <= x <= 2y, x > 2y, x < y/2

enum class PressureConstants {
  Published,       // constants exactly as derived in the proof
  TaylorCorrected  // Taylor-based sub-cases carry the factor 1/2 of the remainder
};

// C(gamma, y_min, y_max) for the case-split lower bound of P~, the minimum over
// the three sub-cases of the relevant gamma range.
template <typename Scalar>
Scalar pressure_case_constant(Scalar gamma, Scalar y_min, Scalar y_max, PressureConstants set) {
  const Scalar t = set == PressureConstants::TaylorCorrected ? Scalar(0.5) : Scalar(1);
  if (gamma <= Scalar(2)) {
    const Scalar band = t * gamma * std::pow(Scalar(2) * y_max, gamma - Scalar(2));
    const Scalar out =
        t * gamma / Scalar(4) * (Scalar(1) - Scalar(1) / (Scalar(1) + std::pow(y_min, gamma)));
    return std::min(band, out);
  }
  const Scalar g1 = gamma - Scalar(1);
  const Scalar band = t * gamma * std::pow(y_min / Scalar(2), gamma - Scalar(2));
  const Scalar ymg = std::pow(y_min, gamma);
  const Scalar above =
      std::min((Scalar(1) - gamma * std::pow(Scalar(2), Scalar(1) - gamma)) / g1, ymg);
  const Scalar below = std::min(Scalar(1) / g1, (Scalar(1) - gamma / (Scalar(2) * g1)) * ymg);
  return std::min({band, above, below});
}

template <typename Scalar>
struct PressureBoundRecord {
  Scalar p = 0;
  Scalar p_lower = 0;  // 1/2 min{1/x, 1/y} (x - y)^2
  Scalar margin_p = 0;
  Scalar pt = 0;
  Scalar pt_min_form = 0;  // gamma min{x^(g-2), y^(g-2)} (x - y)^2, reported only
  Scalar margin_pt_min_form = 0;
  Scalar pt_taylor = 0;  // the same with the 1/2 of the Taylor remainder
  Scalar margin_pt_taylor = 0;
  PressureRegion region = PressureRegion::Band;
  Scalar case_shape = 0;  // (x - y)^2 in the band, 1 + x^gamma outside
  Scalar c_published = 0;
  Scalar margin_published = 0;
  Scalar c_corrected = 0;
  Scalar margin_corrected = 0;
};

template <typename Scalar>
PressureBoundRecord<Scalar> check_pressure_bounds(Scalar x, Scalar y, Scalar gamma, Scalar y_min,
                                                  Scalar y_max) {
  if (!(y_min > Scalar(0)) || !(y_min <= y) || !(y <= y_max))
    throw ConfigError("check_pressure_bounds: need 0 < y_min <= y <= y_max");
  PressureBoundRecord<Scalar> r;
  const Scalar d2 = (x - y) * (x - y);
  r.p = relative_pressure(x, y);
  const Scalar inv_x = x > Scalar(0) ? Scalar(1) / x : std::numeric_limits<Scalar>::infinity();
  r.p_lower = Scalar(0.5) * std::min(inv_x, Scalar(1) / y) * d2;
  r.margin_p = r.p - r.p_lower;

  r.pt = relative_pressure_tilde(x, y, gamma);
  const Scalar xg = std::pow(x, gamma - Scalar(2));  // +inf at x = 0 when gamma < 2
  r.pt_min_form = gamma * std::min(xg, std::pow(y, gamma - Scalar(2))) * d2;
  r.margin_pt_min_form = r.pt - r.pt_min_form;
  r.pt_taylor = Scalar(0.5) * r.pt_min_form;
  r.margin_pt_taylor = r.pt - r.pt_taylor;

  if (x > Scalar(2) * y)
    r.region = PressureRegion::Above;
  else if (x < y / Scalar(2))
    r.region = PressureRegion::Below;
  else
    r.region = PressureRegion::Band;
  r.case_shape = r.region == PressureRegion::Band ? d2 : Scalar(1) + std::pow(x, gamma);
  r.c_published = pressure_case_constant(gamma, y_min, y_max, PressureConstants::Published);
  r.margin_published = r.pt - r.c_published * r.case_shape;
  r.c_corrected = pressure_case_constant(gamma, y_min, y_max, PressureConstants::TaylorCorrected);
  r.margin_corrected = r.pt - r.c_corrected * r.case_shape;
  return r;
}

// Pointwise relative entropy of bar with respect to ref.
template <typename Scalar>
Field<Scalar> relative_entropy_density(const TwoPhaseState<Scalar>& bar,
                                       const TwoPhaseState<Scalar>& ref) {
  return bar.rho / Scalar(2) * (ref.u - bar.u).square() +
         bar.fluid.n / Scalar(2) * (ref.fluid.v - bar.fluid.v).square() +
         relative_pressure(bar.rho, ref.rho) +
         relative_pressure_tilde(bar.fluid.n, ref.fluid.n, ref.fluid.gamma);
}

template <typename Scalar>
Scalar relative_entropy(const TwoPhaseState<Scalar>& bar, const TwoPhaseState<Scalar>& ref,
                        const PhaseGrid<Scalar>& grid) {
  return quad_x(grid, relative_entropy_density(bar, ref));
}

// int (m^2/(2 rho) + w^2/(2 n) + rho log rho + n^gamma/(gamma - 1)) with m = rho u, w = n v.
template <typename Scalar>
Scalar macroscopic_entropy(const TwoPhaseState<Scalar>& st, const PhaseGrid<Scalar>& grid) {
  if ((st.rho <= Scalar(0)).any() || (st.fluid.n <= Scalar(0)).any())
    throw ConfigError("macroscopic_entropy: densities must be positive");
  const Scalar g = st.fluid.gamma;
  const Field<Scalar> m = st.rho * st.u, w = st.fluid.n * st.fluid.v;
  return quad_x(grid, Field<Scalar>(m.square() / (Scalar(2) * st.rho) +
                                    w.square() / (Scalar(2) * st.fluid.n) +
                                    st.rho * st.rho.log() + st.fluid.n.pow(g) / (g - Scalar(1))));
}

// int |A(bar|ref)|: the entrywise sum of the relative flux matrix, which in one
// dimension is scalar.
template <typename Scalar>
Scalar relative_flux_l1(const TwoPhaseState<Scalar>& bar, const TwoPhaseState<Scalar>& ref,
                        const PhaseGrid<Scalar>& grid) {
  const Scalar g = ref.fluid.gamma;
  const Scalar d = Scalar(PhaseGrid<Scalar>::dim());
  return quad_x(grid, Field<Scalar>(bar.rho * (bar.u - ref.u).square() +
                                    bar.fluid.n * (bar.fluid.v - ref.fluid.v).square() +
                                    d * (g - Scalar(1)) *
                                        relative_pressure_tilde(bar.fluid.n, ref.fluid.n, g)));
}

// C with int |A(bar|ref)| <= C int H(bar|ref).
template <typename Scalar>
Scalar relative_flux_constant(Scalar gamma) {
  return std::max(Scalar(2), Scalar(PhaseGrid<Scalar>::dim()) * (gamma - Scalar(1)));
}

template <typename Scalar>
struct MaxwellianGap {
  Scalar rel_entropy = 0;  // int P(f | M)
  Scalar l1 = 0;           // ||f - M||_1
  Scalar mass_f = 0;
  Scalar mass_m = 0;
  // 2 (mass_f + mass_M) int P(f|M) - ||f - M||_1^2, nonnegative by Cauchy-Schwarz.
  Scalar ck_margin = 0;
};

// Pointwise Bregman divergence of t log t between f and M_{rho,u}, summed:
// f log(f/M) - f + M. For equal masses this is int f (log f - log rho) +
// int f |u - xi|^2 / 2 + (d/2) log(2 pi) mass.
template <typename Scalar>
MaxwellianGap<Scalar> maxwellian_gap(const PhaseField<Scalar>& f, const Field<Scalar>& rho,
                                     const Field<Scalar>& u, const PhaseGrid<Scalar>& grid) {
  detail::require_phase_shape(f, grid, "maxwellian_relative_entropy");
  if ((rho <= Scalar(0)).any()) throw ConfigError("maxwellian_relative_entropy: rho must be positive");
  const Scalar log_norm = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  const Field<Scalar> log_rho = rho.log();
  Scalar acc = 0, l1 = 0, mf = 0, mm = 0;
  for (Index j = 0; j < grid.nv(); ++j) {
    const Scalar xi = grid.xi(j);
    const Field<Scalar> log_m = log_rho - log_norm - (xi - u).square() / Scalar(2);
    const Field<Scalar> m = log_m.exp();
    const auto fc = f.col(j);
    acc += ((fc > Scalar(0)).select(fc * (fc.max(std::numeric_limits<Scalar>::min()).log() - log_m),
                                     Scalar(0)) -
            fc + m)
               .sum();
    l1 += (fc - m).abs().sum();
    mf += fc.sum();
    mm += m.sum();
  }
  const Scalar w = grid.dx() * grid.dv();
  MaxwellianGap<Scalar> g;
  g.rel_entropy = std::max(Scalar(0), w * acc);
  g.l1 = w * l1;
  g.mass_f = w * mf;
  g.mass_m = w * mm;
  g.ck_margin = Scalar(2) * (g.mass_f + g.mass_m) * g.rel_entropy - g.l1 * g.l1;
  return g;
}

template <typename Scalar>
Scalar maxwellian_relative_entropy(const PhaseField<Scalar>& f, const Field<Scalar>& rho,
                                   const Field<Scalar>& u, const PhaseGrid<Scalar>& grid) {
  return maxwellian_gap(f, rho, u, grid).rel_entropy;
}

// Macroscopic state (rho, u, n, v) built from the moments of f and the fluid.
template <typename Scalar>
TwoPhaseState<Scalar> moment_state(const PhaseField<Scalar>& f, const FluidState<Scalar>& fl,
                                   const PhaseGrid<Scalar>& grid, const ScalingParams<Scalar>& s,
                                   Scalar t = Scalar(0)) {
  const MomentSet<Scalar> m = compute_moments(f, grid, s);
  TwoPhaseState<Scalar> st;
  st.rho = m.rho;
  st.u = m.u;
  st.fluid = fl;
  st.t = t;
  return st;
}

template <typename Scalar>
struct EntropyReport {
  Scalar t = 0;
  Scalar F = 0;
  Scalar D1 = 0;
  Scalar D2 = 0;
  Scalar E = 0;
  Scalar H = 0;
  Scalar P_f_M = 0;
  Scalar rel_flux_l1 = 0;
  Scalar grad_v_sq = 0;
  // Pieces the audits need separately.
  Scalar drag_part = 0;     // int int |v - xi|^2 f
  Scalar rho_u_v_sq = 0;    // int rho |u - v|^2 with moments of f
  Scalar mass = 0;          // int int f
};

// All functionals at one time level. H and rel_flux_l1 compare the moment state
// against reference when one is given, and are zero otherwise.
template <typename Scalar>
EntropyReport<Scalar> make_entropy_report(const PhaseField<Scalar>& f, const FluidState<Scalar>& fl,
                                          const PhaseGrid<Scalar>& grid,
                                          const ScalingParams<Scalar>& s, Scalar t,
                                          const TwoPhaseState<Scalar>* reference = nullptr) {
  EntropyReport<Scalar> r;
  r.t = t;
  r.F = kinetic_entropy(f, fl, grid);
  r.D1 = dissipation_d1(f, grid, s);
  r.drag_part = drag_dissipation(f, fl.v, grid);
  r.grad_v_sq = velocity_gradient_sq(fl.v, grid);
  r.D2 = r.drag_part + r.grad_v_sq;
  r.mass = quad_xv(grid, f);
  const TwoPhaseState<Scalar> ms = moment_state(f, fl, grid, s, t);
  r.rho_u_v_sq = quad_x(grid, Field<Scalar>(ms.rho * (ms.u - fl.v).square()));
  if ((ms.rho > Scalar(0)).all()) {
    r.E = macroscopic_entropy(ms, grid);
    r.P_f_M = maxwellian_relative_entropy(f, ms.rho, ms.u, grid);
    if (reference) {
      r.H = relative_entropy(ms, *reference, grid);
      r.rel_flux_l1 = relative_flux_l1(ms, *reference, grid);
    }
  }
  return r;
}

template <typename Scalar>
struct AuditRecord {
  Scalar F0 = 0;
  Scalar mass0 = 0;
  // min over samples of F(0) + 3 t mass - [F(t) + int D + int int |v_x|^2]
  Scalar worst_slack_theorem = 0;
  // the same with d t mass, d the dimension: the exact balance in the continuum
  Scalar worst_slack_sharp = 0;
  // max over samples of [F(t) + (1/2eps) int D1 + int int rho|u-v|^2 + int int |v_x|^2 - F(0)] / eps
  Scalar inferred_c_modified = 0;
  Scalar min_D1 = 0;
  Scalar min_D2 = 0;
  std::vector<Scalar> slack_theorem;  // per sample
};

// Trapezoidal audit of the entropy inequality over a sampled history.
template <typename Scalar>
AuditRecord<Scalar> entropy_inequality_audit(const std::vector<EntropyReport<Scalar>>& history,
                                             Scalar eps, int dim = 1) {
  AuditRecord<Scalar> a;
  if (history.empty()) return a;
  const EntropyReport<Scalar>& h0 = history.front();
  a.F0 = h0.F;
  a.mass0 = h0.mass;
  a.worst_slack_theorem = std::numeric_limits<Scalar>::infinity();
  a.worst_slack_sharp = std::numeric_limits<Scalar>::infinity();
  a.inferred_c_modified = -std::numeric_limits<Scalar>::infinity();
  a.min_D1 = h0.D1;
  a.min_D2 = h0.D2;
  Scalar int_d = 0, int_mod = 0;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const EntropyReport<Scalar>& r = history[k];
    if (k > 0) {
      const EntropyReport<Scalar>& p = history[k - 1];
      const Scalar dt = r.t - p.t;
      const auto rate = [eps](const EntropyReport<Scalar>& e) {
        return e.D1 / eps + e.drag_part + e.grad_v_sq;
      };
      const auto rate_mod = [eps](const EntropyReport<Scalar>& e) {
        return e.D1 / (Scalar(2) * eps) + e.rho_u_v_sq + e.grad_v_sq;
      };
      int_d += Scalar(0.5) * dt * (rate(p) + rate(r));
      int_mod += Scalar(0.5) * dt * (rate_mod(p) + rate_mod(r));
    }
    const Scalar elapsed = r.t - h0.t;
    const Scalar lhs = r.F + int_d;
    a.slack_theorem.push_back(a.F0 + Scalar(3) * elapsed * a.mass0 - lhs);
    a.worst_slack_theorem = std::min(a.worst_slack_theorem, a.slack_theorem.back());
    a.worst_slack_sharp =
        std::min(a.worst_slack_sharp, a.F0 + Scalar(dim) * elapsed * a.mass0 - lhs);
    a.inferred_c_modified = std::max(a.inferred_c_modified, (r.F + int_mod - a.F0) / eps);
    a.min_D1 = std::min(a.min_D1, r.D1);
    a.min_D2 = std::min(a.min_D2, r.D2);
  }
  return a;
}

using EntropyReportD = EntropyReport<double>;
using AuditRecordD = AuditRecord<double>;
using PressureBoundRecordD = PressureBoundRecord<double>;

}  // namespace kinfluid
