#include "kbr/embedding.hpp"

#include <cmath>
#include <sstream>

namespace kbr {

namespace {

void require_square(const GramMatrix& g, Eigen::Index n, const char* what) {
  if (g.entries.rows() != n || g.entries.cols() != n) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                       " Gram matrix, got " + std::to_string(g.entries.rows()) + "x" +
                       std::to_string(g.entries.cols()));
  }
}

void require_length(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw InvalidInput(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                       std::to_string(v.size()));
  }
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidInput(std::string(what) + " must be nonnegative and finite");
  }
}

}  // namespace

std::string PosteriorOperator::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* r = std::get_if<RidgeMethod>(&method)) {
    os << "ridge(delta=" << r->delta;
    if (epsilon) os << ", epsilon=" << *epsilon;
  } else {
    os << "pinv(tolerance=" << std::get<PinvMethod>(method).params.describe();
  }
  os << ", y_kernel=" << kbr::describe(y_kernel) << ")";
  return os.str();
}

KbrWeights kbr_weights(const GramMatrix& gx, const Vector& m_pi, double epsilon) {
  require_nonnegative(epsilon, "kbr_weights: epsilon");
  const auto n = gx.size();
  require_length(m_pi, n, "kbr_weights: m_pi");
  Vector mu = solve_ridge(gx.entries, m_pi, {static_cast<double>(n) * epsilon}, "kbr_weights");
  if (!mu.allFinite()) throw SingularMatrix("kbr_weights", 0.0, "non-finite weights");
  return {std::move(mu), epsilon, n};
}

PosteriorOperator posterior_operator_ridge(const KbrWeights& weights, const GramMatrix& gy, double delta) {
  require_nonnegative(delta, "posterior_operator_ridge: delta");
  const auto n = weights.mu.size();
  require_square(gy, n, "posterior_operator_ridge");

  const Matrix lambda_gy = weights.mu.asDiagonal() * gy.entries;
  Matrix system = lambda_gy * lambda_gy;
  system.diagonal().array() += delta;
  const Matrix lambda = weights.mu.asDiagonal();
  Matrix r = lambda_gy * solve_general(system, lambda, "posterior_operator_ridge");
  return {std::move(r), RidgeMethod{delta}, weights.epsilon, gy.kernel};
}

PosteriorOperator posterior_operator_pinv(const GramMatrix& gx, const Vector& m_pi, const GramMatrix& gy,
                                          const PinvParams& params) {
  const auto n = gx.size();
  require_length(m_pi, n, "posterior_operator_pinv: m_pi");
  require_square(gy, n, "posterior_operator_pinv");

  const Vector mu = pseudo_inverse(gx.entries, params) * m_pi;
  const Matrix lambda_gy = mu.asDiagonal() * gy.entries;
  Matrix r = pseudo_inverse(lambda_gy, params) * mu.asDiagonal();
  return {std::move(r), PinvMethod{params}, std::nullopt, gy.kernel};
}

Vector posterior_embedding_weights(const PosteriorOperator& op, const Vector& ky_at_y) {
  require_length(ky_at_y, op.matrix.cols(), "posterior_embedding_weights: k_Y(y)");
  return op.matrix * ky_at_y;
}

double posterior_expectation(const Vector& f_values, const PosteriorOperator& op, const Vector& ky_at_y) {
  require_length(f_values, op.matrix.rows(), "posterior_expectation: f");
  return f_values.dot(posterior_embedding_weights(op, ky_at_y));
}

Vector conditional_embedding_weights(const GramMatrix& gx, const Vector& kx_at_x, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInput("conditional_embedding_weights: epsilon must be positive");
  }
  const auto n = gx.size();
  require_length(kx_at_x, n, "conditional_embedding_weights: k_X(x)");
  return solve_ridge(gx.entries, kx_at_x, {static_cast<double>(n) * epsilon}, "conditional_embedding_weights");
}

}  // namespace kbr
