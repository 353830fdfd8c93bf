#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "kinfluid/core.hpp"
#include "kinfluid/kinetic.hpp"
#include "kinfluid/tridiagonal.hpp"

namespace kinfluid {

template <typename Scalar>
Field<Scalar> pressure(const Field<Scalar>& n, Scalar gamma) {
  if ((n <= Scalar(0)).any()) throw VacuumError("pressure: nonpositive density");
  return n.pow(gamma);
}

template <typename Scalar>
Field<Scalar> sound_speed(const Field<Scalar>& n, Scalar gamma) {
  return (gamma * n.pow(gamma - Scalar(1))).sqrt();
}

// Largest dt with dt * max(|v| + c) / dx = 1.
template <typename Scalar>
Scalar ns_max_dt(const FluidState<Scalar>& fl, const PhaseGrid<Scalar>& grid) {
  return grid.dx() / (fl.v.abs() + sound_speed(fl.n, fl.gamma)).maxCoeff();
}

template <typename Scalar>
struct NsOptions {
  Scalar n_floor = Scalar(1e-10);
};

namespace detail {

template <typename Scalar>
void check_vacuum(const Field<Scalar>& n, Scalar floor, const char* what) {
  for (Index i = 0; i < n.size(); ++i) {
    if (!(n(i) > floor)) {
      std::ostringstream os;
      os.precision(17);
      os << what << ": vacuum at cell " << i << " (density " << n(i) << ")";
      throw VacuumError(os.str());
    }
  }
}

// Solves a(i) w(i) - mu (w(i+1) - 2 w(i) + w(i-1)) / dx^2 = a(i) rhs(i) with
// odd ghosts, i.e. w = 0 on both walls. Symmetric positive definite.
template <typename Scalar>
Field<Scalar> implicit_viscous_solve(const Field<Scalar>& a, const Field<Scalar>& rhs, Scalar mu,
                                     Scalar dx) {
  const Index nx = a.size();
  const Scalar k = mu / (dx * dx);
  Field<Scalar> lower = Field<Scalar>::Constant(nx, -k);
  Field<Scalar> upper = Field<Scalar>::Constant(nx, -k);
  Field<Scalar> diag = a + Scalar(2) * k;
  diag(0) += k;
  diag(nx - 1) += k;
  return solve_tridiagonal(lower, diag, upper, Field<Scalar>(a * rhs));
}

}  // namespace detail

// The implicit drag update v' = (n v + dt rho u) / (n + dt rho).
template <typename Scalar>
Field<Scalar> implicit_drag_velocity(const Field<Scalar>& drag_rho, const Field<Scalar>& drag_u,
                                     const Field<Scalar>& n, const Field<Scalar>& v, Scalar dt) {
  return (n * v + dt * drag_rho * drag_u) / (n + dt * drag_rho);
}

// Momentum moved into each phase by one implicit drag substep.
template <typename Scalar>
std::pair<Scalar, Scalar> momentum_exchange(const Field<Scalar>& drag_rho,
                                            const Field<Scalar>& drag_u, const Field<Scalar>& n,
                                            const Field<Scalar>& v, Scalar dt,
                                            const PhaseGrid<Scalar>& grid) {
  detail::require_size(drag_rho, grid.nx(), "momentum_exchange drag_rho");
  detail::require_size(drag_u, grid.nx(), "momentum_exchange drag_u");
  detail::require_size(n, grid.nx(), "momentum_exchange n");
  detail::require_size(v, grid.nx(), "momentum_exchange v");
  const Field<Scalar> v_new = implicit_drag_velocity(drag_rho, drag_u, n, v, dt);
  const Scalar dp_fluid = quad_x(grid, Field<Scalar>(dt * drag_rho * (drag_u - v_new)));
  return {-dp_fluid, dp_fluid};
}

// Rusanov flux update of (n, n v) over dt with mirrored density and negated
// momentum in the wall ghosts.
template <typename Scalar>
FluidState<Scalar> ns_hyperbolic_step(const FluidState<Scalar>& fl, Scalar dt,
                                      const PhaseGrid<Scalar>& grid,
                                      const NsOptions<Scalar>& opt = {}) {
  detail::require_fluid_shape(fl, grid, "ns_step");
  detail::check_vacuum(fl.n, opt.n_floor, "ns_step");
  const Scalar cfl = dt / ns_max_dt(fl, grid);
  if (!detail::cfl_ok(cfl)) throw CflError(detail::cfl_message("ns_step", cfl));

  const Index nx = grid.nx();
  const Scalar g = fl.gamma;
  const Field<Scalar> m = fl.n * fl.v;
  const Field<Scalar> c = sound_speed(fl.n, g);
  const Field<Scalar> p = fl.n.pow(g);

  Field<Scalar> fn(nx + 1), fm(nx + 1);
  auto face = [&](Scalar nl, Scalar ml, Scalar vl, Scalar cl, Scalar pl, Scalar nr, Scalar mr,
                  Scalar vr, Scalar cr, Scalar pr, Index k) {
    const Scalar a = std::max(std::abs(vl) + cl, std::abs(vr) + cr);
    fn(k) = Scalar(0.5) * (ml + mr) - Scalar(0.5) * a * (nr - nl);
    fm(k) = Scalar(0.5) * (ml * vl + pl + mr * vr + pr) - Scalar(0.5) * a * (mr - ml);
  };
  face(fl.n(0), -m(0), -fl.v(0), c(0), p(0), fl.n(0), m(0), fl.v(0), c(0), p(0), 0);
  for (Index k = 1; k < nx; ++k)
    face(fl.n(k - 1), m(k - 1), fl.v(k - 1), c(k - 1), p(k - 1), fl.n(k), m(k), fl.v(k), c(k),
         p(k), k);
  const Index l = nx - 1;
  face(fl.n(l), m(l), fl.v(l), c(l), p(l), fl.n(l), -m(l), -fl.v(l), c(l), p(l), nx);

  const Scalar lam = dt / grid.dx();
  FluidState<Scalar> out = fl;
  out.n = fl.n - lam * (fn.tail(nx) - fn.head(nx));
  detail::check_vacuum(out.n, opt.n_floor, "ns_step");
  out.v = (m - lam * (fm.tail(nx) - fm.head(nx))) / out.n;
  out.t = fl.t + dt;
  return out;
}

// Implicit viscosity n (v' - v) / dt = mu v'_xx with v' = 0 on the walls.
template <typename Scalar>
FluidState<Scalar> ns_viscous_step(const FluidState<Scalar>& fl, Scalar dt,
                                   const PhaseGrid<Scalar>& grid) {
  FluidState<Scalar> out = fl;
  out.v = detail::implicit_viscous_solve(Field<Scalar>(fl.n / dt), fl.v, fl.mu, grid.dx());
  return out;
}

// One split step of the isentropic Navier-Stokes equations: Rusanov hyperbolic
// update, implicit viscosity, implicit drag toward drag_u. Empty drag fields
// switch the drag off.
template <typename Scalar>
FluidState<Scalar> ns_step(const FluidState<Scalar>& fl, const Field<Scalar>& drag_rho,
                           const Field<Scalar>& drag_u, Scalar dt, const PhaseGrid<Scalar>& grid,
                           const NsOptions<Scalar>& opt = {}) {
  FluidState<Scalar> out = ns_viscous_step(ns_hyperbolic_step(fl, dt, grid, opt), dt, grid);
  if (drag_rho.size() != 0 || drag_u.size() != 0) {
    detail::require_size(drag_rho, grid.nx(), "ns_step drag_rho");
    detail::require_size(drag_u, grid.nx(), "ns_step drag_u");
    out.v = implicit_drag_velocity(drag_rho, drag_u, out.n, out.v, dt);
  }
  return out;
}

template <typename Scalar>
FluidState<Scalar> ns_step(const FluidState<Scalar>& fl, Scalar dt, const PhaseGrid<Scalar>& grid,
                           const NsOptions<Scalar>& opt = {}) {
  return ns_step(fl, Field<Scalar>(), Field<Scalar>(), dt, grid, opt);
}

// Discrete integral of |v_x|^2 matching the viscous solve: interior faces plus
// half-weighted wall faces where the jump to the odd ghost is 2 v.
template <typename Scalar>
Scalar velocity_gradient_sq(const Field<Scalar>& v, const PhaseGrid<Scalar>& grid) {
  detail::require_size(v, grid.nx(), "velocity_gradient_sq");
  const Index nx = v.size();
  Scalar s = 0;
  if (nx > 1) s = (v.tail(nx - 1) - v.head(nx - 1)).square().sum();
  s += Scalar(0.5) * (Scalar(2) * v(0)) * (Scalar(2) * v(0));
  s += Scalar(0.5) * (Scalar(2) * v(nx - 1)) * (Scalar(2) * v(nx - 1));
  return s / grid.dx();
}

// Integral of n v^2 / 2 + n^gamma / (gamma - 1).
template <typename Scalar>
Scalar fluid_energy(const FluidState<Scalar>& fl, const PhaseGrid<Scalar>& grid) {
  return quad_x(grid, Field<Scalar>(fl.n * fl.v.square() / Scalar(2) +
                                    fl.n.pow(fl.gamma) / (fl.gamma - Scalar(1))));
}

}  // namespace kinfluid
