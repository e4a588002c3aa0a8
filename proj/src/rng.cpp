#include "kbr/rng.hpp"

#include "kbr/error.hpp"

namespace kbr {

Vector sample_mvnormal(const Vector& mean, const Matrix& cov, RngStream& rng) {
  const auto d = mean.size();
  if (cov.rows() != d || cov.cols() != d || d == 0) throw InvalidInput("sample_mvnormal: dimension mismatch");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw InvalidInput("sample_mvnormal: covariance is not SPD");
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.standard_normal();
  return mean + llt.matrixL() * z;
}

}  // namespace kbr
