#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kinfluid/core.hpp"
#include "kinfluid/fluid.hpp"

namespace kinfluid {

template <typename Scalar>
struct EulerOptions {
  bool hyperbolic = true;  // test hook: false leaves only the drag relaxation
  bool drag = true;
  Scalar rho_floor = Scalar(1e-10);
};

template <typename Scalar>
Scalar euler_max_dt(const Field<Scalar>& u, const PhaseGrid<Scalar>& grid) {
  return grid.dx() / (u.abs() + Scalar(1)).maxCoeff();
}

// Isothermal Euler with pressure rho, kinematic walls, and drag relaxation of u
// toward coupling_v integrated exactly over dt with coupling_v held fixed.
template <typename Scalar>
std::pair<Field<Scalar>, Field<Scalar>> euler_step(const Field<Scalar>& rho, const Field<Scalar>& u,
                                                   const Field<Scalar>& coupling_v, Scalar dt,
                                                   const PhaseGrid<Scalar>& grid,
                                                   const EulerOptions<Scalar>& opt = {}) {
  const Index nx = grid.nx();
  detail::require_size(rho, nx, "euler_step rho");
  detail::require_size(u, nx, "euler_step u");
  detail::require_size(coupling_v, nx, "euler_step coupling_v");
  detail::check_vacuum(rho, opt.rho_floor, "euler_step");

  Field<Scalar> r = rho, w = u;
  if (opt.hyperbolic) {
    const Scalar cfl = dt / euler_max_dt(u, grid);
    if (!detail::cfl_ok(cfl)) throw CflError(detail::cfl_message("euler_step", cfl));
    const Field<Scalar> m = rho * u;
    Field<Scalar> fr(nx + 1), fm(nx + 1);
    auto face = [&](Scalar rl, Scalar ml, Scalar ul, Scalar rr, Scalar mr, Scalar ur, Index k) {
      const Scalar a = std::max(std::abs(ul), std::abs(ur)) + Scalar(1);
      fr(k) = Scalar(0.5) * (ml + mr) - Scalar(0.5) * a * (rr - rl);
      fm(k) = Scalar(0.5) * (ml * ul + rl + mr * ur + rr) - Scalar(0.5) * a * (mr - ml);
    };
    face(rho(0), -m(0), -u(0), rho(0), m(0), u(0), 0);
    for (Index k = 1; k < nx; ++k) face(rho(k - 1), m(k - 1), u(k - 1), rho(k), m(k), u(k), k);
    const Index l = nx - 1;
    face(rho(l), m(l), u(l), rho(l), -m(l), -u(l), nx);
    const Scalar lam = dt / grid.dx();
    r = rho - lam * (fr.tail(nx) - fr.head(nx));
    detail::check_vacuum(r, opt.rho_floor, "euler_step");
    w = (m - lam * (fm.tail(nx) - fm.head(nx))) / r;
  }
  if (opt.drag) w = coupling_v + (w - coupling_v) * std::exp(-dt);
  return {std::move(r), std::move(w)};
}

template <typename Scalar>
struct TwoPhaseHooks {
  bool freeze_fluid = false;     // fluid velocity held fixed, only u relaxes
  bool euler_hyperbolic = true;  // false removes the Euler flux and pressure
};

template <typename Scalar>
struct TwoPhaseStepResult {
  TwoPhaseState<Scalar> state;
  Scalar dP_particles = 0;  // momentum change of the particle phase from drag
  Scalar dP_fluid = 0;      // momentum change of the fluid phase from drag
};

namespace detail {

// Exact relaxation of the pair (u, v) under rho u' = rho (v - u), n v' = rho (u - v)
// over tau. Adds the momentum change of each phase, measured from the updated
// velocities, to gain_p and gain_f.
template <typename Scalar>
void drag_relax(TwoPhaseState<Scalar>& st, Scalar tau, bool freeze_fluid, Scalar& gain_p,
                Scalar& gain_f, Scalar dx) {
  const Index nx = st.rho.size();
  for (Index i = 0; i < nx; ++i) {
    const Scalar rho = st.rho(i), n = st.fluid.n(i);
    const Scalar u0 = st.u(i), v0 = st.fluid.v(i);
    const Scalar w = v0 - u0;
    if (freeze_fluid) {
      st.u(i) = v0 - w * std::exp(-tau);
    } else {
      const Scalar w1 = w * std::exp(-(Scalar(1) + rho / n) * tau);
      const Scalar d = (w - w1) * rho * n / (rho + n);
      st.u(i) = u0 + d / rho;
      st.fluid.v(i) = v0 - d / n;
    }
    gain_p += dx * rho * (st.u(i) - u0);
    gain_f += dx * n * (st.fluid.v(i) - v0);
  }
}

}  // namespace detail

template <typename Scalar>
Scalar two_phase_max_dt(const TwoPhaseState<Scalar>& st, const PhaseGrid<Scalar>& grid) {
  return std::min(euler_max_dt(st.u, grid), ns_max_dt(st.fluid, grid));
}

// Strang step of the limit system: drag exchange dt/2, Euler flux dt,
// Navier-Stokes dt, drag exchange dt/2.
template <typename Scalar>
TwoPhaseStepResult<Scalar> two_phase_step(const TwoPhaseState<Scalar>& st, Scalar dt,
                                          const PhaseGrid<Scalar>& grid,
                                          const TwoPhaseHooks<Scalar>& hooks = {}) {
  detail::require_size(st.rho, grid.nx(), "two_phase_step rho");
  detail::require_size(st.u, grid.nx(), "two_phase_step u");
  detail::require_fluid_shape(st.fluid, grid, "two_phase_step fluid");
  const Scalar half = dt / Scalar(2);

  TwoPhaseStepResult<Scalar> res;
  res.state = st;
  TwoPhaseState<Scalar>& s = res.state;
  detail::drag_relax(s, half, hooks.freeze_fluid, res.dP_particles, res.dP_fluid, grid.dx());
  if (hooks.euler_hyperbolic) {
    EulerOptions<Scalar> eo;
    eo.drag = false;
    auto [r, u] = euler_step(s.rho, s.u, s.fluid.v, dt, grid, eo);
    s.rho = std::move(r);
    s.u = std::move(u);
  }
  if (!hooks.freeze_fluid) s.fluid = ns_step(s.fluid, dt, grid);
  detail::drag_relax(s, half, hooks.freeze_fluid, res.dP_particles, res.dP_fluid, grid.dx());
  s.fluid.t = st.t + dt;
  s.t = st.t + dt;
  return res;
}

// (g, u, h, v) with g = log(M rho), M = |Omega|, and h = n - 1.
template <typename Scalar>
struct SymHypState {
  Field<Scalar> g, u, h, v;
};

template <typename Scalar>
SymHypState<Scalar> to_symhyp(const TwoPhaseState<Scalar>& st, const PhaseGrid<Scalar>& grid) {
  if ((st.rho <= Scalar(0)).any()) throw PositivityError("to_symhyp: rho must be positive");
  if ((st.fluid.n <= Scalar(0)).any()) throw PositivityError("to_symhyp: n must be positive");
  const Scalar M = grid.length();
  return {(M * st.rho).log(), st.u, st.fluid.n - Scalar(1), st.fluid.v};
}

template <typename Scalar>
TwoPhaseState<Scalar> from_symhyp(const SymHypState<Scalar>& sh, const PhaseGrid<Scalar>& grid,
                                  Scalar gamma, Scalar t = Scalar(0)) {
  if ((sh.h <= Scalar(-1)).any()) throw PositivityError("from_symhyp: 1 + h must be positive");
  const Scalar M = grid.length();
  TwoPhaseState<Scalar> st;
  st.rho = sh.g.exp() / M;
  st.u = sh.u;
  st.fluid.n = sh.h + Scalar(1);
  st.fluid.v = sh.v;
  st.fluid.gamma = gamma;
  st.fluid.t = t;
  st.t = t;
  return st;
}

// Squared L2 distance summed over the four components.
template <typename Scalar>
Scalar symhyp_distance_sq(const SymHypState<Scalar>& a, const SymHypState<Scalar>& b,
                          const PhaseGrid<Scalar>& grid) {
  const Scalar dx = grid.dx();
  return dx * ((a.g - b.g).square().sum() + (a.u - b.u).square().sum() +
               (a.h - b.h).square().sum() + (a.v - b.v).square().sum());
}

template <typename Scalar>
struct IterationReport {
  Index m = 0;
  Scalar cauchy_l2 = 0;
  Scalar contraction_ratio = 0;
};

// One Picard iterate over the whole horizon: levels[k] is the state at k * dt.
template <typename Scalar>
struct SymHypPath {
  std::vector<SymHypState<Scalar>> levels;
  Index iteration = 0;
  Scalar cauchy_l2 = std::numeric_limits<Scalar>::quiet_NaN();  // distance to the previous iterate
};

template <typename Scalar>
struct PicardConfig {
  Scalar dt = Scalar(1e-3);
  Index steps = 1;
  Scalar gamma = Scalar(2);
  Scalar mu = Scalar(1);
};

// Iterate zero: the initial data held constant in time.
template <typename Scalar>
SymHypPath<Scalar> picard_initial(const SymHypState<Scalar>& data, const PicardConfig<Scalar>& cfg) {
  SymHypPath<Scalar> p;
  p.levels.assign(static_cast<std::size_t>(cfg.steps + 1), data);
  return p;
}

// A dt for which both frozen-coefficient systems satisfy dt * max|speed| / dx <= cfl,
// with the speeds measured on the initial data.
template <typename Scalar>
Scalar picard_dt(const SymHypState<Scalar>& data, Scalar gamma, Scalar cfl,
                 const PhaseGrid<Scalar>& grid) {
  const Field<Scalar> a = Scalar(1) + data.h;
  const Field<Scalar> c = (gamma * a.pow(gamma - Scalar(1))).sqrt();
  const Scalar s = std::max((data.v.abs() + c).maxCoeff(), (data.u.abs() + Scalar(1)).maxCoeff());
  return cfl * grid.dx() / s;
}

namespace detail {

// Frozen-coefficient CIR upwind increment for a 2x2 system with
// matrix [[s, a], [b, s]] (a, b > 0) at one cell.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> cir_increment(Scalar s, Scalar a, Scalar b,
                                          const Eigen::Matrix<Scalar, 2, 1>& left,
                                          const Eigen::Matrix<Scalar, 2, 1>& centre,
                                          const Eigen::Matrix<Scalar, 2, 1>& right) {
  using Mat = Eigen::Matrix<Scalar, 2, 2>;
  const Scalar c = std::sqrt(a * b);
  Mat R;
  R << Scalar(1), Scalar(1), c / a, -c / a;
  Mat Rinv;
  Rinv << Scalar(0.5), Scalar(0.5) * a / c, Scalar(0.5), Scalar(-0.5) * a / c;
  const Scalar l1 = s + c, l2 = s - c;
  const Mat plus = R * Eigen::Matrix<Scalar, 2, 1>(std::max(l1, Scalar(0)), std::max(l2, Scalar(0))).asDiagonal() * Rinv;
  const Mat minus = R * Eigen::Matrix<Scalar, 2, 1>(std::min(l1, Scalar(0)), std::min(l2, Scalar(0))).asDiagonal() * Rinv;
  return plus * (centre - left) + minus * (right - centre);
}

}  // namespace detail

// Next Picard iterate from prev. Coefficients and sources are taken from prev at
// the old time level, so the new iterate at level k+1 only sees prev up to level k.
template <typename Scalar>
std::pair<SymHypPath<Scalar>, IterationReport<Scalar>> picard_iterate(
    const SymHypPath<Scalar>& prev, const PicardConfig<Scalar>& cfg,
    const PhaseGrid<Scalar>& grid) {
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  const Index nx = grid.nx();
  const Scalar dt = cfg.dt, lam = dt / grid.dx(), M = grid.length(), gamma = cfg.gamma;
  const std::size_t levels = prev.levels.size();
  if (levels == 0) throw ConfigError("picard_iterate: empty path");

  SymHypPath<Scalar> next;
  next.iteration = prev.iteration + 1;
  next.levels.reserve(levels);
  next.levels.push_back(prev.levels.front());

  for (std::size_t k = 0; k + 1 < levels; ++k) {
    const SymHypState<Scalar>& pm = prev.levels[k];
    const SymHypState<Scalar>& cur = next.levels[k];
    const Field<Scalar> am = Scalar(1) + pm.h;
    if ((am <= Scalar(0)).any())
      throw PositivityError("picard_iterate: 1 + h lost positivity in the previous iterate");

    // eta = (h, v) with matrix [[v^m, 1 + h^m], [gamma (1 + h^m)^(gamma - 2), v^m]].
    Field<Scalar> hs(nx), vs(nx);
    for (Index i = 0; i < nx; ++i) {
      const Vec2 c(cur.h(i), cur.v(i));
      const Vec2 l = i > 0 ? Vec2(cur.h(i - 1), cur.v(i - 1)) : Vec2(cur.h(0), -cur.v(0));
      const Vec2 r = i + 1 < nx ? Vec2(cur.h(i + 1), cur.v(i + 1)) : Vec2(cur.h(i), -cur.v(i));
      const Scalar b = gamma * std::pow(am(i), gamma - Scalar(2));
      const Vec2 inc = detail::cir_increment(pm.v(i), am(i), b, l, c, r);
      const Scalar e2 = std::exp(pm.g(i)) / (M * am(i)) * (pm.u(i) - pm.v(i));
      hs(i) = c(0) - lam * inc(0);
      vs(i) = c(1) - lam * inc(1) + dt * e2;
    }
    SymHypState<Scalar> nl;
    nl.h = hs;
    nl.v = detail::implicit_viscous_solve(Field<Scalar>(am / dt), vs, cfg.mu, grid.dx());

    // (g, u) with matrix [[u^m, 1], [1, u^m]] and drag v^{m+1} - u^{m+1}, implicit in u.
    Field<Scalar> gs(nx), us(nx);
    for (Index i = 0; i < nx; ++i) {
      const Vec2 c(cur.g(i), cur.u(i));
      const Vec2 l = i > 0 ? Vec2(cur.g(i - 1), cur.u(i - 1)) : Vec2(cur.g(0), -cur.u(0));
      const Vec2 r = i + 1 < nx ? Vec2(cur.g(i + 1), cur.u(i + 1)) : Vec2(cur.g(i), -cur.u(i));
      const Vec2 inc = detail::cir_increment(pm.u(i), Scalar(1), Scalar(1), l, c, r);
      gs(i) = c(0) - lam * inc(0);
      us(i) = c(1) - lam * inc(1);
    }
    nl.g = gs;
    nl.u = (us + dt * nl.v) / (Scalar(1) + dt);
    next.levels.push_back(std::move(nl));
  }

  Scalar worst = 0;
  for (std::size_t k = 0; k < levels; ++k)
    worst = std::max(worst, symhyp_distance_sq(next.levels[k], prev.levels[k], grid));
  next.cauchy_l2 = std::sqrt(worst);

  IterationReport<Scalar> rep;
  rep.m = next.iteration;
  rep.cauchy_l2 = next.cauchy_l2;
  if (std::isnan(prev.cauchy_l2))
    rep.contraction_ratio = std::numeric_limits<Scalar>::quiet_NaN();
  else if (prev.cauchy_l2 == Scalar(0))
    rep.contraction_ratio = Scalar(0);
  else
    rep.contraction_ratio = next.cauchy_l2 / prev.cauchy_l2;
  return {std::move(next), rep};
}

template <typename Scalar>
struct PositivityReport {
  Scalar min_one_plus_h = 0;
  Scalar max_rel_deviation = 0;
};

namespace detail {

// Linear interpolation of cell-centred data, extrapolating from the end pairs.
template <typename Scalar>
Scalar interp_cells(const Field<Scalar>& f, Scalar x, const PhaseGrid<Scalar>& grid) {
  const Index nx = f.size();
  if (nx == 1) return f(0);
  const Scalar s = (x - grid.x_lo()) / grid.dx() - Scalar(0.5);
  const Index i = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, nx - 2);
  const Scalar w = s - Scalar(i);
  return (Scalar(1) - w) * f(i) + w * f(i + 1);
}

template <typename Scalar>
Field<Scalar> cell_gradient(const Field<Scalar>& f, Scalar dx) {
  const Index nx = f.size();
  Field<Scalar> g(nx);
  if (nx == 1) return g.setZero();
  for (Index i = 1; i + 1 < nx; ++i) g(i) = (f(i + 1) - f(i - 1)) / (Scalar(2) * dx);
  g(0) = (f(1) - f(0)) / dx;
  g(nx - 1) = (f(nx - 1) - f(nx - 2)) / dx;
  return g;
}

}  // namespace detail

// Follows forward characteristics of v from every cell centre and compares
// (1 + h0) exp(-int v_x dt) with the recorded 1 + h at the foot of the path.
template <typename Scalar>
PositivityReport<Scalar> density_positivity_check(const std::vector<Field<Scalar>>& h_path,
                                                  const std::vector<Field<Scalar>>& v_path,
                                                  Scalar dt, const PhaseGrid<Scalar>& grid) {
  if (h_path.size() != v_path.size() || h_path.empty())
    throw ShapeError("density_positivity_check: paths must be aligned and nonempty");
  const Index nx = grid.nx();
  PositivityReport<Scalar> rep;
  rep.min_one_plus_h = std::numeric_limits<Scalar>::infinity();
  for (const auto& h : h_path) {
    detail::require_size(h, nx, "density_positivity_check h");
    rep.min_one_plus_h = std::min(rep.min_one_plus_h, Scalar(1) + h.minCoeff());
  }
  std::vector<Field<Scalar>> div;
  div.reserve(v_path.size());
  for (const auto& v : v_path) {
    detail::require_size(v, nx, "density_positivity_check v");
    div.push_back(detail::cell_gradient(v, grid.dx()));
  }

  for (Index i = 0; i < nx; ++i) {
    Scalar x = grid.x(i);
    Scalar integral = 0;
    const Scalar base = Scalar(1) + h_path[0](i);
    for (std::size_t k = 0; k + 1 < h_path.size(); ++k) {
      const Scalar v0 = detail::interp_cells(v_path[k], x, grid);
      const Scalar d0 = detail::interp_cells(div[k], x, grid);
      const Scalar xp = std::clamp(x + dt * v0, grid.x_lo(), grid.x_hi());
      const Scalar v1 = detail::interp_cells(v_path[k + 1], xp, grid);
      x = std::clamp(x + Scalar(0.5) * dt * (v0 + v1), grid.x_lo(), grid.x_hi());
      const Scalar d1 = detail::interp_cells(div[k + 1], x, grid);
      integral += Scalar(0.5) * dt * (d0 + d1);
      const Scalar predicted = base * std::exp(-integral);
      const Scalar actual = Scalar(1) + detail::interp_cells(h_path[k + 1], x, grid);
      rep.max_rel_deviation = std::max(rep.max_rel_deviation, std::abs(predicted - actual) / actual);
    }
  }
  return rep;
}

// Test hook: h carried by the uniform compression v = -(x - centre) through a
// conservative upwind continuity solve with zero-gradient inflow ghosts.
template <typename Scalar>
std::pair<std::vector<Field<Scalar>>, std::vector<Field<Scalar>>> compression_hook_paths(
    const Field<Scalar>& h0, Scalar dt, Index steps, const PhaseGrid<Scalar>& grid) {
  const Index nx = grid.nx();
  detail::require_size(h0, nx, "compression_hook_paths h0");
  const Scalar centre = Scalar(0.5) * (grid.x_lo() + grid.x_hi());
  Field<Scalar> v(nx);
  for (Index i = 0; i < nx; ++i) v(i) = -(grid.x(i) - centre);
  Field<Scalar> vf(nx + 1);
  for (Index k = 0; k <= nx; ++k) vf(k) = -(grid.x_lo() + Scalar(k) * grid.dx() - centre);
  const Scalar cfl = dt * vf.abs().maxCoeff() / grid.dx();
  if (!detail::cfl_ok(cfl)) throw CflError(detail::cfl_message("compression_hook_paths", cfl));

  std::vector<Field<Scalar>> hp{h0}, vp{v};
  Field<Scalar> n = Scalar(1) + h0;
  Field<Scalar> flux(nx + 1);
  for (Index s = 0; s < steps; ++s) {
    for (Index k = 0; k <= nx; ++k) {
      const Scalar left = k > 0 ? n(k - 1) : n(0);
      const Scalar right = k < nx ? n(k) : n(nx - 1);
      flux(k) = vf(k) > 0 ? vf(k) * left : vf(k) * right;
    }
    n -= (dt / grid.dx()) * (flux.tail(nx) - flux.head(nx));
    hp.push_back(n - Scalar(1));
    vp.push_back(v);
  }
  return {std::move(hp), std::move(vp)};
}

using SymHypStateD = SymHypState<double>;
using SymHypPathD = SymHypPath<double>;
using PicardConfigD = PicardConfig<double>;
using IterationReportD = IterationReport<double>;

}  // namespace kinfluid
