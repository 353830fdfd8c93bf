#pragma once

#include <cmath>
#include <numbers>

#include "kinfluid/core.hpp"

namespace kinfluid {

template <typename Scalar>
struct MomentSet {
  Field<Scalar> rho;
  Field<Scalar> mom;
  Field<Scalar> u;  // mom / (rho + vel_floor)
  Field<Scalar> stress;
  Field<Scalar> kin_energy;
};

template <typename Scalar>
MomentSet<Scalar> compute_moments(const PhaseField<Scalar>& f, const PhaseGrid<Scalar>& grid,
                                  const ScalingParams<Scalar>& s) {
  detail::require_phase_shape(f, grid, "compute_moments");
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vec xi = grid.xi_centers().matrix();
  const Scalar dv = grid.dv();

  MomentSet<Scalar> m;
  m.rho = dv * f.rowwise().sum();
  m.mom = dv * (f.matrix() * xi).array();
  m.u = m.mom / (m.rho + s.vel_floor);
  m.kin_energy = (dv / Scalar(2)) * (f.matrix() * xi.cwiseAbs2()).array();
  m.stress.resize(grid.nx());
  for (Index i = 0; i < grid.nx(); ++i) {
    const Scalar ui = m.u(i);
    m.stress(i) = dv * (f.row(i).transpose() * (xi.array() - ui).square()).sum();
  }
  return m;
}

template <typename Scalar>
MomentSet<Scalar> compute_moments(const KineticState<Scalar>& k, const PhaseGrid<Scalar>& grid,
                                  const ScalingParams<Scalar>& s) {
  return compute_moments(k.f, grid, s);
}

// rho (2 pi)^{-d/2} exp(-|xi - u|^2 / 2) at every cell centre.
template <typename Scalar>
KineticState<Scalar> maxwellian(const Field<Scalar>& rho, const Field<Scalar>& u,
                                const PhaseGrid<Scalar>& grid) {
  detail::require_size(rho, grid.nx(), "maxwellian rho");
  detail::require_size(u, grid.nx(), "maxwellian u");
  const Scalar norm = Scalar(1) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
  KineticState<Scalar> out;
  out.f.resize(grid.nx(), grid.nv());
  for (Index j = 0; j < grid.nv(); ++j) {
    const Scalar xi = grid.xi(j);
    out.f.col(j) = rho * norm * (-(xi - u).square() / Scalar(2)).exp();
  }
  return out;
}

// chi_lambda(v) = v on |v| <= lambda, 0 beyond.
template <typename Scalar>
Field<Scalar> truncate_velocity(const Field<Scalar>& u, Scalar lambda) {
  if (!(lambda > Scalar(0))) throw ConfigError("truncate_velocity: lambda must be positive");
  return (u.abs() <= lambda).select(u, Scalar(0));
}

}  // namespace kinfluid
