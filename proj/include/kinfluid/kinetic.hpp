#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <sstream>
#include <utility>

#include "kinfluid/core.hpp"
#include "kinfluid/moments.hpp"
#include "kinfluid/tridiagonal.hpp"

namespace kinfluid {

// xi - 2 (xi . r) r for any Eigen vector pair.
template <typename DX, typename DR>
typename DX::PlainObject reflect(const Eigen::MatrixBase<DX>& xi, const Eigen::MatrixBase<DR>& r) {
  return xi - 2 * xi.dot(r) * r;
}

template <std::floating_point Scalar>
Scalar reflect(Scalar xi, Scalar r) {
  return xi - Scalar(2) * xi * r * r;
}

enum class BoundaryKind { Specular, Diffuse, Dirichlet };

// Wall rule filling incoming ghost populations. At x_lo the incoming
// velocities are xi > 0, at x_hi they are xi < 0.
template <typename Scalar>
class BoundaryKernel {
 public:
  static BoundaryKernel specular() { return BoundaryKernel(BoundaryKind::Specular); }

  // Re-emits the outgoing flux with the wall Maxwellian of temperature T, normalised
  // on the discrete grid so that the emitted flux equals the absorbed flux.
  static BoundaryKernel diffuse(const PhaseGrid<Scalar>& grid, Scalar wall_temperature) {
    if (!(wall_temperature > Scalar(0)))
      throw ConfigError("diffuse kernel: wall temperature must be positive");
    BoundaryKernel k(BoundaryKind::Diffuse);
    k.wall_temperature_ = wall_temperature;
    const Index nv = grid.nv();
    const Field<Scalar> xi = grid.xi_centers();
    const Field<Scalar> mw = wall_maxwellian(grid, wall_temperature);
    k.emit_lo_ = (xi > Scalar(0)).select(mw, Scalar(0));
    k.emit_hi_ = (xi < Scalar(0)).select(mw, Scalar(0));
    const Scalar z_lo = grid.dv() * (xi * k.emit_lo_).sum();
    const Scalar z_hi = grid.dv() * (-xi * k.emit_hi_).sum();
    k.emit_lo_ /= z_lo;
    k.emit_hi_ /= z_hi;

    // Row sum: a unit outgoing flux is re-emitted as a unit incoming flux.
    const Scalar row_lo = grid.dv() * (xi * k.emit_lo_).sum();
    const Scalar row_hi = grid.dv() * (-xi * k.emit_hi_).sum();
    if (std::abs(row_lo - 1) > 1e-12 || std::abs(row_hi - 1) > 1e-12)
      throw SolverError("diffuse kernel: discrete flux normalisation violated");
    // The wall Maxwellian is reproduced on the incoming half.
    Field<Scalar> ghost_lo(nv), ghost_hi(nv);
    k.fill_ghosts(grid, mw.transpose(), mw.transpose(), ghost_lo, ghost_hi);
    for (Index j = 0; j < nv; ++j) {
      const bool in_lo = xi(j) > 0;
      const Scalar e = in_lo ? ghost_lo(j) - mw(j) : ghost_hi(j) - mw(j);
      if (std::abs(e) > 1e-12 * mw.maxCoeff())
        throw SolverError("diffuse kernel: wall Maxwellian is not a fixed point");
    }
    return k;
  }

  // Prescribed incoming profiles; only entries on the incoming half are used.
  static BoundaryKernel dirichlet(const PhaseGrid<Scalar>& grid, Field<Scalar> g_lo,
                                  Field<Scalar> g_hi) {
    detail::require_size(g_lo, grid.nv(), "dirichlet kernel g_lo");
    detail::require_size(g_hi, grid.nv(), "dirichlet kernel g_hi");
    if ((g_lo < Scalar(0)).any() || (g_hi < Scalar(0)).any())
      throw ConfigError("dirichlet kernel: incoming profile must be nonnegative");
    BoundaryKernel k(BoundaryKind::Dirichlet);
    k.emit_lo_ = std::move(g_lo);
    k.emit_hi_ = std::move(g_hi);
    return k;
  }

  BoundaryKind kind() const { return kind_; }
  Scalar wall_temperature() const { return wall_temperature_; }
  const Field<Scalar>& profile(Wall w) const { return w == Wall::Lo ? emit_lo_ : emit_hi_; }

  // Ghost rows for both walls given the first and last spatial rows of f.
  // Entries on the outgoing half of each ghost are left as zero.
  template <typename RowLo, typename RowHi>
  void fill_ghosts(const PhaseGrid<Scalar>& grid, const RowLo& first, const RowHi& last,
                   Field<Scalar>& ghost_lo, Field<Scalar>& ghost_hi) const {
    const Index nv = grid.nv();
    const Index half = nv / 2;  // j < half: xi < 0
    ghost_lo.setZero(nv);
    ghost_hi.setZero(nv);
    switch (kind_) {
      case BoundaryKind::Specular:
        for (Index j = half; j < nv; ++j) ghost_lo(j) = first(grid.mirror(j));
        for (Index j = 0; j < half; ++j) ghost_hi(j) = last(grid.mirror(j));
        break;
      case BoundaryKind::Diffuse: {
        Scalar out_lo = 0, out_hi = 0;
        for (Index j = 0; j < half; ++j) out_lo += -grid.xi(j) * first(j);
        for (Index j = half; j < nv; ++j) out_hi += grid.xi(j) * last(j);
        out_lo *= grid.dv();
        out_hi *= grid.dv();
        for (Index j = half; j < nv; ++j) ghost_lo(j) = emit_lo_(j) * out_lo;
        for (Index j = 0; j < half; ++j) ghost_hi(j) = emit_hi_(j) * out_hi;
        break;
      }
      case BoundaryKind::Dirichlet:
        for (Index j = half; j < nv; ++j) ghost_lo(j) = emit_lo_(j);
        for (Index j = 0; j < half; ++j) ghost_hi(j) = emit_hi_(j);
        break;
    }
  }

  static Field<Scalar> wall_maxwellian(const PhaseGrid<Scalar>& grid, Scalar temperature) {
    const Field<Scalar> xi = grid.xi_centers();
    const Scalar norm = Scalar(1) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * temperature);
    return norm * (-xi.square() / (Scalar(2) * temperature)).exp();
  }

 private:
  explicit BoundaryKernel(BoundaryKind kind) : kind_(kind) {}
  BoundaryKind kind_;
  Scalar wall_temperature_ = Scalar(1);
  Field<Scalar> emit_lo_, emit_hi_;
};

template <typename Scalar>
struct KineticStepReport {
  Scalar mass_before = 0;
  Scalar mass_after = 0;
  // Outward mass through each wall over the step, integral of (xi . r) gamma f.
  std::array<Scalar, 2> boundary_flux{0, 0};
  // Largest instantaneous |(xi . r) gamma f| integral seen at either wall.
  Scalar max_wall_flux_rate = 0;
  // Mass that would have left through +-v_max; diagnostic only.
  Scalar truncation_leak = 0;
};

// A velocity-space substep together with the mass it would have lost at +-v_max.
template <typename Scalar>
struct VelocityStep {
  KineticState<Scalar> state;
  Scalar truncation_leak = 0;
};

namespace detail {

template <typename Scalar>
std::string cfl_message(const char* what, Scalar number) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": CFL number " << number << " exceeds 1";
  return os.str();
}

// Tolerates the last-bit rounding of dt computed as exactly the stability limit.
template <typename Scalar>
bool cfl_ok(Scalar number) {
  return number <= Scalar(1) + Scalar(64) * std::numeric_limits<Scalar>::epsilon();
}

template <typename Scalar>
Scalar bernoulli(Scalar w) {
  if (w == Scalar(0)) return Scalar(1);
  return w / std::expm1(w);
}

}  // namespace detail

// Outward mass flux rate at each wall for f with the given ghosts, summed in
// mirror pairs so that a specular ghost gives an exact zero.
template <typename Scalar>
std::array<Scalar, 2> wall_flux_rates(const PhaseGrid<Scalar>& grid, const PhaseField<Scalar>& f,
                                      const Field<Scalar>& ghost_lo,
                                      const Field<Scalar>& ghost_hi) {
  const Index nv = grid.nv(), half = nv / 2, last = grid.nx() - 1;
  Scalar lo = 0, hi = 0;
  for (Index j = 0; j < half; ++j) {
    const Index m = grid.mirror(j);
    const Scalar xo = grid.xi(j);  // negative
    const Scalar xin = grid.xi(m);
    lo += -xo * f(0, j) + -xin * ghost_lo(m);
    hi += xin * f(last, m) + xo * ghost_hi(j);
  }
  return {grid.dv() * lo, grid.dv() * hi};
}

// Conservative first-order upwind advection in x over dt.
template <typename Scalar>
std::pair<KineticState<Scalar>, KineticStepReport<Scalar>> transport_step(
    const KineticState<Scalar>& k, const PhaseGrid<Scalar>& grid, Scalar dt,
    const BoundaryKernel<Scalar>& bc) {
  detail::require_phase_shape(k.f, grid, "transport_step");
  if (!(dt >= Scalar(0))) throw ConfigError("transport_step: dt must be nonnegative");
  const Scalar cfl = dt * grid.v_max() / grid.dx();
  if (!detail::cfl_ok(cfl)) throw CflError(detail::cfl_message("transport_step", cfl));

  const Index nx = grid.nx(), nv = grid.nv();
  const PhaseField<Scalar>& f = k.f;
  Field<Scalar> ghost_lo, ghost_hi;
  bc.fill_ghosts(grid, f.row(0), f.row(nx - 1), ghost_lo, ghost_hi);

  KineticStepReport<Scalar> rep;
  rep.mass_before = quad_xv(grid, f);
  const auto rates = wall_flux_rates(grid, f, ghost_lo, ghost_hi);
  rep.boundary_flux = {dt * rates[0], dt * rates[1]};
  rep.max_wall_flux_rate = std::max(std::abs(rates[0]), std::abs(rates[1]));

  KineticState<Scalar> out{PhaseField<Scalar>(nx, nv), k.t + dt};
  const Scalar lam = dt / grid.dx();
  Field<Scalar> flux(nx + 1);
  for (Index j = 0; j < nv; ++j) {
    const Scalar xi = grid.xi(j);
    if (xi > 0) {
      flux(0) = xi * ghost_lo(j);
      flux.tail(nx) = xi * f.col(j);
    } else {
      flux.head(nx) = xi * f.col(j);
      flux(nx) = xi * ghost_hi(j);
    }
    out.f.col(j) = f.col(j) - lam * (flux.tail(nx) - flux.head(nx));
  }
  rep.mass_after = quad_xv(grid, out.f);
  return {std::move(out), rep};
}

// Upwind advection in xi with drift chi_lambda(v) - xi and closed ends.
template <typename Scalar>
VelocityStep<Scalar> drag_step_with_leak(const KineticState<Scalar>& k,
                                         const Field<Scalar>& fluid_v, Scalar dt,
                                         const PhaseGrid<Scalar>& grid,
                                         const ScalingParams<Scalar>& s) {
  detail::require_phase_shape(k.f, grid, "drag_step");
  detail::require_size(fluid_v, grid.nx(), "drag_step fluid_v");
  const Scalar cfl = dt * (fluid_v.abs().maxCoeff() + grid.v_max()) / grid.dv();
  if (!detail::cfl_ok(cfl)) throw CflError(detail::cfl_message("drag_step", cfl));

  const Index nx = grid.nx(), nv = grid.nv();
  const Field<Scalar> vc = std::isinf(s.chi_lambda) ? fluid_v : truncate_velocity(fluid_v, s.chi_lambda);
  const Scalar lam = dt / grid.dv();
  VelocityStep<Scalar> res{KineticState<Scalar>{PhaseField<Scalar>(nx, nv), k.t + dt}, 0};
  Field<Scalar> flux(nv + 1);
  for (Index i = 0; i < nx; ++i) {
    const auto row = k.f.row(i);
    flux(0) = 0;
    flux(nv) = 0;
    for (Index j = 0; j + 1 < nv; ++j) {
      const Scalar a = vc(i) - grid.xi_face(j);
      flux(j + 1) = a > 0 ? a * row(j) : a * row(j + 1);
    }
    for (Index j = 0; j < nv; ++j) res.state.f(i, j) = row(j) - lam * (flux(j + 1) - flux(j));
    const Scalar a_top = vc(i) - grid.v_max();
    const Scalar a_bot = vc(i) + grid.v_max();
    Scalar leak = 0;
    if (a_top > 0) leak += a_top * row(nv - 1);
    if (a_bot < 0) leak += -a_bot * row(0);
    res.truncation_leak += dt * grid.dx() * leak;
  }
  return res;
}

template <typename Scalar>
KineticState<Scalar> drag_step(const KineticState<Scalar>& k, const Field<Scalar>& fluid_v,
                               Scalar dt, const PhaseGrid<Scalar>& grid,
                               const ScalingParams<Scalar>& s) {
  return drag_step_with_leak(k, fluid_v, dt, grid, s).state;
}

// Implicit Euler for (1/eps) d/dxi (df/dxi + (xi - u) f) with exponentially fitted
// fluxes; sampled Maxwellians with the same u are exact stationary states.
template <typename Scalar>
VelocityStep<Scalar> fokker_planck_step_with_leak(const KineticState<Scalar>& k,
                                                  const Field<Scalar>& u, Scalar dt,
                                                  const PhaseGrid<Scalar>& grid,
                                                  const ScalingParams<Scalar>& s) {
  detail::require_phase_shape(k.f, grid, "fokker_planck_step");
  detail::require_size(u, grid.nx(), "fokker_planck_step u");
  s.validate();
  if (!(dt >= Scalar(0))) throw ConfigError("fokker_planck_step: dt must be nonnegative");

  const Index nx = grid.nx(), nv = grid.nv();
  const Scalar dv = grid.dv();
  const Scalar kappa = dt / (s.eps * dv * dv);
  VelocityStep<Scalar> res{KineticState<Scalar>{PhaseField<Scalar>(nx, nv), k.t + dt}, 0};
  Field<Scalar> bp(nv - 1), bm(nv - 1), lower(nv), diag(nv), upper(nv), rhs(nv);
  for (Index i = 0; i < nx; ++i) {
    for (Index j = 0; j + 1 < nv; ++j) {
      const Scalar w = dv * (grid.xi_face(j) - u(i));
      bp(j) = detail::bernoulli(w);
      bm(j) = detail::bernoulli(-w);
    }
    for (Index j = 0; j < nv; ++j) {
      Scalar d = 1;
      lower(j) = 0;
      upper(j) = 0;
      if (j + 1 < nv) {
        d += kappa * bp(j);
        upper(j) = -kappa * bm(j);
      }
      if (j > 0) {
        d += kappa * bm(j - 1);
        lower(j) = -kappa * bp(j - 1);
      }
      diag(j) = d;
    }
    rhs = k.f.row(i).transpose();
    const Field<Scalar> sol = solve_tridiagonal(lower, diag, upper, rhs);
    res.state.f.row(i) = sol.transpose();

    const Scalar w_top = dv * (grid.v_max() - u(i));
    const Scalar w_bot = dv * (-grid.v_max() - u(i));
    const Scalar out = (detail::bernoulli(w_top) * sol(nv - 1) + detail::bernoulli(-w_bot) * sol(0)) /
                       (s.eps * dv);
    res.truncation_leak += dt * grid.dx() * out;
  }
  return res;
}

template <typename Scalar>
KineticState<Scalar> fokker_planck_step(const KineticState<Scalar>& k, const Field<Scalar>& u,
                                        Scalar dt, const PhaseGrid<Scalar>& grid,
                                        const ScalingParams<Scalar>& s) {
  return fokker_planck_step_with_leak(k, u, dt, grid, s).state;
}

// Strang splitting: transport dt/2, drag dt/2, Fokker-Planck dt, drag dt/2, transport dt/2.
template <typename Scalar>
std::pair<KineticState<Scalar>, KineticStepReport<Scalar>> kinetic_step(
    const KineticState<Scalar>& k, const FluidState<Scalar>& fluid, Scalar dt,
    const PhaseGrid<Scalar>& grid, const ScalingParams<Scalar>& s,
    const BoundaryKernel<Scalar>& bc) {
  detail::require_fluid_shape(fluid, grid, "kinetic_step fluid");
  const Scalar half = dt / Scalar(2);
  auto [k1, r1] = transport_step(k, grid, half, bc);
  auto d1 = drag_step_with_leak(k1, fluid.v, half, grid, s);
  const Field<Scalar> u = compute_moments(d1.state.f, grid, s).u;
  auto fp = fokker_planck_step_with_leak(d1.state, u, dt, grid, s);
  auto d2 = drag_step_with_leak(fp.state, fluid.v, half, grid, s);
  auto [k2, r2] = transport_step(d2.state, grid, half, bc);
  k2.t = k.t + dt;

  KineticStepReport<Scalar> rep;
  rep.mass_before = r1.mass_before;
  rep.mass_after = r2.mass_after;
  rep.boundary_flux = {r1.boundary_flux[0] + r2.boundary_flux[0],
                       r1.boundary_flux[1] + r2.boundary_flux[1]};
  rep.max_wall_flux_rate = std::max(r1.max_wall_flux_rate, r2.max_wall_flux_rate);
  rep.truncation_leak = d1.truncation_leak + fp.truncation_leak + d2.truncation_leak;
  return {std::move(k2), rep};
}

using BoundaryKernelD = BoundaryKernel<double>;
using KineticStepReportD = KineticStepReport<double>;

}  // namespace kinfluid
