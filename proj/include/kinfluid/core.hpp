#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "kinfluid/errors.hpp"

namespace kinfluid {

using Index = Eigen::Index;

// One value per spatial (or velocity) cell.
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

// Phase-space samples: row i is the spatial cell, column j the velocity cell.
template <typename Scalar>
using PhaseField = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Wall { Lo, Hi };

template <typename Scalar>
class PhaseGrid {
 public:
  PhaseGrid(Index nx, Index nv, Scalar x_lo, Scalar x_hi, Scalar v_max)
      : nx_(nx), nv_(nv), x_lo_(x_lo), x_hi_(x_hi), v_max_(v_max) {
    if (nx <= 0 || nv <= 0) throw ConfigError("PhaseGrid: nx and nv must be positive");
    if (nv % 2 != 0) throw ConfigError("PhaseGrid: nv must be even");
    if (!(x_hi > x_lo)) throw ConfigError("PhaseGrid: need x_hi > x_lo");
    if (!(v_max > Scalar(0))) throw ConfigError("PhaseGrid: v_max must be positive");
    dx_ = (x_hi - x_lo) / Scalar(nx);
    dv_ = Scalar(2) * v_max / Scalar(nv);
  }

  Index nx() const { return nx_; }
  Index nv() const { return nv_; }
  Scalar x_lo() const { return x_lo_; }
  Scalar x_hi() const { return x_hi_; }
  Scalar v_max() const { return v_max_; }
  Scalar dx() const { return dx_; }
  Scalar dv() const { return dv_; }
  Scalar length() const { return x_hi_ - x_lo_; }
  static constexpr int dim() { return 1; }

  Scalar x(Index i) const { return x_lo_ + (Scalar(i) + Scalar(0.5)) * dx_; }

  // Written so that xi(mirror(j)) == -xi(j) holds bit for bit.
  Scalar xi(Index j) const { return Scalar(2 * j - nv_ + 1) * dv_ / Scalar(2); }
  // Velocity at the face between cells j and j+1.
  Scalar xi_face(Index j) const { return Scalar(j + 1 - nv_ / 2) * dv_; }
  Index mirror(Index j) const { return nv_ - 1 - j; }

  // Outward normal r: -1 at x_lo, +1 at x_hi.
  static constexpr Scalar normal(Wall w) { return w == Wall::Lo ? Scalar(-1) : Scalar(1); }

  Field<Scalar> x_centers() const {
    Field<Scalar> out(nx_);
    for (Index i = 0; i < nx_; ++i) out(i) = x(i);
    return out;
  }
  Field<Scalar> xi_centers() const {
    Field<Scalar> out(nv_);
    for (Index j = 0; j < nv_; ++j) out(j) = xi(j);
    return out;
  }

  bool operator==(const PhaseGrid& o) const {
    return nx_ == o.nx_ && nv_ == o.nv_ && x_lo_ == o.x_lo_ && x_hi_ == o.x_hi_ &&
           v_max_ == o.v_max_;
  }

 private:
  Index nx_, nv_;
  Scalar x_lo_, x_hi_, v_max_;
  Scalar dx_{}, dv_{};
};

template <typename Scalar>
struct KineticState {
  PhaseField<Scalar> f;
  Scalar t = Scalar(0);
};

template <typename Scalar>
struct FluidState {
  Field<Scalar> n;
  Field<Scalar> v;
  Scalar gamma = Scalar(2);
  Scalar mu = Scalar(1);
  Scalar t = Scalar(0);
};

template <typename Scalar>
struct TwoPhaseState {
  Field<Scalar> rho;
  Field<Scalar> u;
  FluidState<Scalar> fluid;
  Scalar t = Scalar(0);
};

template <typename Scalar>
struct ScalingParams {
  Scalar eps = Scalar(1);
  Scalar vel_floor = Scalar(1e-12);
  Scalar chi_lambda = std::numeric_limits<Scalar>::infinity();

  void validate() const {
    if (!(eps > Scalar(0))) throw ConfigError("ScalingParams: eps must be positive");
    if (!(vel_floor >= Scalar(0))) throw ConfigError("ScalingParams: vel_floor must be >= 0");
    if (!(chi_lambda > Scalar(0))) throw ConfigError("ScalingParams: chi_lambda must be positive");
  }
};

namespace detail {

inline std::string shape_message(const char* what, Index got, Index want) {
  std::ostringstream os;
  os << what << ": size " << got << ", expected " << want;
  return os.str();
}

template <typename Derived>
void require_size(const Eigen::DenseBase<Derived>& a, Index want, const char* what) {
  if (a.size() != want) throw ShapeError(shape_message(what, a.size(), want));
}

template <typename Scalar>
void require_phase_shape(const PhaseField<Scalar>& f, const PhaseGrid<Scalar>& grid,
                         const char* what) {
  if (f.rows() != grid.nx() || f.cols() != grid.nv()) {
    std::ostringstream os;
    os << what << ": phase field is " << f.rows() << "x" << f.cols() << ", grid is "
       << grid.nx() << "x" << grid.nv();
    throw ShapeError(os.str());
  }
}

template <typename Scalar>
void require_fluid_shape(const FluidState<Scalar>& fl, const PhaseGrid<Scalar>& grid,
                         const char* what) {
  require_size(fl.n, grid.nx(), what);
  require_size(fl.v, grid.nx(), what);
}

}  // namespace detail

// Midpoint rule in velocity: dv * sum.
template <typename Scalar, typename Derived>
Scalar quad_v(const PhaseGrid<Scalar>& grid, const Eigen::ArrayBase<Derived>& field) {
  detail::require_size(field, grid.nv(), "quad_v");
  return grid.dv() * Scalar(field.sum());
}

template <typename Scalar, typename Derived>
Scalar quad_x(const PhaseGrid<Scalar>& grid, const Eigen::ArrayBase<Derived>& field) {
  detail::require_size(field, grid.nx(), "quad_x");
  return grid.dx() * Scalar(field.sum());
}

// Integral over the whole phase space.
template <typename Scalar, typename Derived>
Scalar quad_xv(const PhaseGrid<Scalar>& grid, const Eigen::ArrayBase<Derived>& field) {
  if (field.rows() != grid.nx() || field.cols() != grid.nv())
    throw ShapeError("quad_xv: phase field does not match grid");
  return grid.dx() * grid.dv() * Scalar(field.sum());
}

namespace detail {

template <typename Scalar, typename DA, typename DB>
Scalar weight_for(const PhaseGrid<Scalar>& grid, const Eigen::ArrayBase<DA>& a,
                  const Eigen::ArrayBase<DB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("distance: operands differ in shape");
  if (a.cols() == 1 && a.rows() == grid.nx()) return grid.dx();
  if (a.cols() == 1 && a.rows() == grid.nv()) return grid.dv();
  if (a.rows() == grid.nx() && a.cols() == grid.nv()) return grid.dx() * grid.dv();
  throw ShapeError("distance: operand shape matches neither the spatial, velocity nor phase grid");
}

}  // namespace detail

// Weighted discrete L1 norm of a - b; weight dx, dv or dx*dv by shape.
template <typename Scalar, typename DA, typename DB>
Scalar l1_distance(const PhaseGrid<Scalar>& grid, const Eigen::ArrayBase<DA>& a,
                   const Eigen::ArrayBase<DB>& b) {
  const Scalar w = detail::weight_for(grid, a, b);
  return w * Scalar((a - b).abs().sum());
}

template <typename Scalar, typename DA, typename DB>
Scalar l2_distance(const PhaseGrid<Scalar>& grid, const Eigen::ArrayBase<DA>& a,
                   const Eigen::ArrayBase<DB>& b) {
  const Scalar w = detail::weight_for(grid, a, b);
  return std::sqrt(w * Scalar((a - b).square().sum()));
}

using Grid = PhaseGrid<double>;
using FieldD = Field<double>;
using PhaseFieldD = PhaseField<double>;
using KineticStateD = KineticState<double>;
using FluidStateD = FluidState<double>;
using TwoPhaseStateD = TwoPhaseState<double>;
using ScalingParamsD = ScalingParams<double>;

}  // namespace kinfluid
