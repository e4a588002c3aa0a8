#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "kbr/kernels.hpp"

namespace kbr {

/// Additive diagonal term rho >= 0 (n*epsilon or delta at the call sites).
struct RidgeParams {
  double rho = 0.0;
};

/// Singular values below rel_tolerance * sigma_max are dropped. An empty
/// tolerance means the default 1e-12 * max(m, n) for the matrix at hand.
struct PinvParams {
  std::optional<double> rel_tolerance;

  double resolve(Eigen::Index rows, Eigen::Index cols) const;
  std::string describe() const;
};

double default_pinv_tolerance(Eigen::Index rows, Eigen::Index cols);

/// Solves (A + rho I) x = b for symmetric A. Cholesky first; symmetric
/// eigendecomposition when Cholesky fails or looks ill-conditioned.
/// Throws SingularMatrix when the smallest |eigenvalue| of A + rho I is at
/// most 1e-14 times the largest.
Vector solve_ridge(const Matrix& a, const Vector& b, RidgeParams ridge,
                   std::string_view stage = "solve_ridge");

/// General (nonsymmetric) solve A X = B by partial-pivot LU. Throws
/// SingularMatrix when the reciprocal condition estimate is <= 1e-14.
Matrix solve_general(const Matrix& a, const Matrix& b, std::string_view stage = "solve_general");

Matrix pseudo_inverse(const Matrix& a, const PinvParams& params = {});

/// Nonincreasing, length min(m, n).
Vector singular_values(const Matrix& a);

/// sigma_min / sigma_max, or 0 for the zero matrix.
double inverse_condition(const Matrix& a);

}  // namespace kbr
