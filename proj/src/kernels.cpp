#include "kbr/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace kbr {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInput("gaussian kernel: sigma must be positive and finite, got " +
                       std::to_string(sigma));
  }
}

}  // namespace

std::string describe(const KernelDescriptor& kernel) {
  if (const auto* g = std::get_if<GaussianKernelParams>(&kernel)) {
    std::ostringstream os;
    os.precision(17);
    os << "gaussian(sigma=" << g->sigma << ")";
    return os.str();
  }
  return "delta";
}

double gaussian_kernel(const Vector& x, const Vector& y, GaussianKernelParams params) {
  check_sigma(params.sigma);
  if (x.size() != y.size() || x.size() == 0) {
    throw InvalidInput("gaussian kernel: dimension mismatch (" + std::to_string(x.size()) +
                       " vs " + std::to_string(y.size()) + ")");
  }
  const double sq = (x - y).squaredNorm();
  const double s = params.sigma;
  return std::exp(-sq / (2.0 * s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
}

GaussianKernel::GaussianKernel(GaussianKernelParams params) : params_(params) {
  check_sigma(params_.sigma);
}

}  // namespace kbr
