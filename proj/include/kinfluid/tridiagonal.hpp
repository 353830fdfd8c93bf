#pragma once

#include <cmath>

#include "kinfluid/core.hpp"

namespace kinfluid {

// Thomas algorithm for lower(i) x(i-1) + diag(i) x(i) + upper(i) x(i+1) = rhs(i).
// lower(0) and upper(n-1) are ignored. No pivoting: meant for the diagonally
// dominant systems built by the solvers here.
template <typename Scalar>
Field<Scalar> solve_tridiagonal(const Field<Scalar>& lower, const Field<Scalar>& diag,
                                const Field<Scalar>& upper, const Field<Scalar>& rhs) {
  const Index n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw ShapeError("solve_tridiagonal: band sizes differ");
  Field<Scalar> c(n), x(n);
  Scalar beta = diag(0);
  if (!(std::abs(beta) > Scalar(0)) || !std::isfinite(beta))
    throw SolverError("solve_tridiagonal: zero pivot in row 0");
  c(0) = upper(0) / beta;
  x(0) = rhs(0) / beta;
  for (Index i = 1; i < n; ++i) {
    beta = diag(i) - lower(i) * c(i - 1);
    if (!(std::abs(beta) > Scalar(0)) || !std::isfinite(beta))
      throw SolverError("solve_tridiagonal: zero pivot");
    c(i) = (i + 1 < n) ? upper(i) / beta : Scalar(0);
    x(i) = (rhs(i) - lower(i) * x(i - 1)) / beta;
  }
  for (Index i = n - 2; i >= 0; --i) x(i) -= c(i) * x(i + 1);
  return x;
}

}  // namespace kinfluid
