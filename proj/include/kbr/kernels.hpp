#pragma once

#include <Eigen/Dense>

#include <compare>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "kbr/error.hpp"

namespace kbr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Index into an ordered class list {C_1, ..., C_g}; id 0 is C_1.
struct ClassLabel {
  std::size_t id = 0;

  friend auto operator<=>(const ClassLabel&, const ClassLabel&) = default;
};

struct GaussianKernelParams {
  double sigma = 1.0;

  friend bool operator==(const GaussianKernelParams&, const GaussianKernelParams&) = default;
};

struct DeltaKernelParams {
  friend bool operator==(const DeltaKernelParams&, const DeltaKernelParams&) = default;
};

/// Which kernel (and parameters) produced a Gram matrix or kernel vector.
using KernelDescriptor = std::variant<GaussianKernelParams, DeltaKernelParams>;

std::string describe(const KernelDescriptor& kernel);

/// (1 / (sqrt(2 pi) sigma)) exp(-|x - y|^2 / (2 sigma^2)) with the Euclidean
/// norm and one shared bandwidth. Far-apart points flush to 0.
double gaussian_kernel(const Vector& x, const Vector& y, GaussianKernelParams params);

/// Indicator kernel on class labels.
constexpr double delta_kernel(ClassLabel a, ClassLabel b) noexcept { return a == b ? 1.0 : 0.0; }

class GaussianKernel {
 public:
  using input_type = Vector;

  explicit GaussianKernel(GaussianKernelParams params);

  double operator()(const Vector& x, const Vector& y) const {
    return gaussian_kernel(x, y, params_);
  }
  double sigma() const noexcept { return params_.sigma; }
  KernelDescriptor descriptor() const { return params_; }

 private:
  GaussianKernelParams params_;
};

class DeltaKernel {
 public:
  using input_type = ClassLabel;

  double operator()(ClassLabel a, ClassLabel b) const noexcept { return delta_kernel(a, b); }
  KernelDescriptor descriptor() const { return DeltaKernelParams{}; }
};

template <class K>
concept Kernel = requires(const K& k, const typename K::input_type& a) {
  { k(a, a) } -> std::convertible_to<double>;
  { k.descriptor() } -> std::convertible_to<KernelDescriptor>;
};

struct GramMatrix {
  Matrix entries;
  KernelDescriptor kernel;

  Eigen::Index size() const noexcept { return entries.rows(); }
};

/// entries(i, j) = k(points[i], points[j]). The upper triangle is evaluated
/// and mirrored, so the result is exactly symmetric.
template <Kernel K>
GramMatrix gram_matrix(std::span<const typename K::input_type> points, const K& kernel) {
  if (points.empty()) throw InvalidInput("gram_matrix: empty point list");
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return {std::move(g), kernel.descriptor()};
}

/// Component i is k(points[i], query).
template <Kernel K>
Vector kernel_vector(std::span<const typename K::input_type> points,
                     const typename K::input_type& query, const K& kernel) {
  Vector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = kernel(points[i], query);
  }
  return out;
}

}  // namespace kbr
