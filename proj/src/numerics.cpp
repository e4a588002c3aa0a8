#include "kbr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kbr {

namespace {

constexpr double kSingularRatio = 1e-14;
// Cholesky results are accepted outright only when comfortably conditioned;
// borderline systems go through the eigen path, which applies kSingularRatio
// in the 2-norm.
constexpr double kCholeskyRcondFloor = 1e-12;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double default_pinv_tolerance(Eigen::Index rows, Eigen::Index cols) {
  return 1e-12 * static_cast<double>(std::max(rows, cols));
}

double PinvParams::resolve(Eigen::Index rows, Eigen::Index cols) const {
  if (!rel_tolerance) return default_pinv_tolerance(rows, cols);
  const double t = *rel_tolerance;
  if (!(t > 0.0 && t < 1.0)) {
    throw InvalidInput("pinv tolerance must lie in (0, 1), got " + format_double(t));
  }
  return t;
}

std::string PinvParams::describe() const {
  return rel_tolerance ? format_double(*rel_tolerance) : std::string("default(1e-12*max(m,n))");
}

Vector solve_ridge(const Matrix& a, const Vector& b, RidgeParams ridge, std::string_view stage) {
  const auto n = a.rows();
  if (a.cols() != n || b.size() != n || n == 0) {
    throw InvalidInput(std::string(stage) + ": dimension mismatch");
  }
  if (!(ridge.rho >= 0.0) || !std::isfinite(ridge.rho)) {
    throw InvalidInput(std::string(stage) + ": ridge term must be nonnegative, got " +
                       format_double(ridge.rho));
  }
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw InvalidInput(std::string(stage) + ": matrix is not symmetric");
  }

  Matrix shifted = a;
  shifted.diagonal().array() += ridge.rho;

  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() == Eigen::Success && llt.rcond() > kCholeskyRcondFloor) {
    return llt.solve(b);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(shifted);
  const Vector& lambda = eig.eigenvalues();
  Eigen::Index imin = 0;
  const double min_abs = lambda.cwiseAbs().minCoeff(&imin);
  const double max_abs = lambda.cwiseAbs().maxCoeff();
  if (!(min_abs > kSingularRatio * max_abs)) {
    throw SingularMatrix(std::string(stage), lambda(imin),
                         "smallest eigenvalue " + format_double(lambda(imin)) + ", largest |eigenvalue| " +
                             format_double(max_abs));
  }
  const Matrix& v = eig.eigenvectors();
  return v * (v.transpose() * b).cwiseQuotient(lambda);
}

Matrix solve_general(const Matrix& a, const Matrix& b, std::string_view stage) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || a.rows() == 0) {
    throw InvalidInput(std::string(stage) + ": dimension mismatch");
  }
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRatio)) {
    throw SingularMatrix(std::string(stage), rcond, "reciprocal condition estimate " + format_double(rcond));
  }
  Matrix x = lu.solve(b);
  if (!x.allFinite()) {
    throw SingularMatrix(std::string(stage), rcond, "non-finite solution");
  }
  return x;
}

Matrix pseudo_inverse(const Matrix& a, const PinvParams& params) {
  const double tol = params.resolve(a.rows(), a.cols());
  if (a.size() == 0) throw InvalidInput("pseudo_inverse: empty matrix");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = tol * (s.size() > 0 ? s(0) : 0.0);
  Vector inv_s = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv_s(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return {};
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

double inverse_condition(const Matrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

}  // namespace kbr
