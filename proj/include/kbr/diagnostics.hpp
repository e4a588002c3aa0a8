#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kbr/classifiers.hpp"
#include "kbr/embedding.hpp"

namespace kbr {

/// Pass/fail tally of a randomized check, reproducible from `seed`.
struct TrialReport {
  std::string name;
  std::string statistic;  // what min/median summarize
  double threshold = 0.0;
  std::size_t trials = 0;
  std::size_t passes = 0;
  double min_statistic = 0.0;
  double median_statistic = 0.0;
  std::uint64_t seed = 0;

  double pass_fraction() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(passes) / static_cast<double>(trials);
  }
};

/// sigma_min(a) > ratio * sigma_max(a).
bool passes_nonsingular_screen(const Matrix& a, double ratio = 1e-8);

/// max_j |KBR1(prior_a)_j - KBR1(prior_b)_j| at y. Both priors must be
/// strictly positive.
double prior_independence_gap(const LabeledSample& sample, const Vector& prior_a, const Vector& prior_b,
                              const Vector& y, double sigma, double epsilon, double delta);

/// Per trial: n points from N(0, I_d), Gaussian Gram matrix, pass iff
/// sigma_min / sigma_max > 1e-10.
TrialReport gram_nonsingularity_trial(std::size_t n, std::size_t d, double sigma, std::size_t trials,
                                      std::uint64_t seed);

/// Per trial: n points from N(0, I_d), mu = (G_X + n eps I)^{-1} m_pi,
/// pass iff min |mu_i| / max |mu_i| > 1e-14.
TrialReport weights_nonzero_trial(std::size_t n, std::size_t d, double sigma, double epsilon,
                                  const PriorMixture<Vector>& prior, std::size_t trials, std::uint64_t seed);

struct ConstantTarget {
  double value = 1.0;
};

/// k_a = sqrt(2 pi) sigma k_G(., a), i.e. exp(-(x - a)^2 / (2 sigma^2)).
struct KernelSectionTarget {
  double center = 0.0;
};

using ProbeTarget = std::variant<ConstantTarget, KernelSectionTarget>;

std::string describe(const ProbeTarget& target);

struct ProbePoint {
  double epsilon = 0.0;
  double norm = 0.0;      // RKHS norm of the regularized solution
  double fit_norm = 0.0;  // sqrt(alpha^T G alpha), the in-span component
};

/// Draws X_1..X_n from N(0, sigma0^2) on the line and solves the empirical
/// regularized equation (C_XX + eps I) g = rhs for each eps, where
/// C_XX = (1/n) sum_i k(., X_i) (x) k(., X_i).
///
///  * constant(c): rhs = (1/n) sum_i c k(., X_i), the empirical cross
///    covariance with a constant conditional expectation. g lies in the
///    span, g = sum_i alpha_i k(., X_i), alpha = ((1/n) G + eps I)^{-1} v / n.
///  * kernel_section(a): rhs = k_a itself. With alpha as above,
///    g = (k_a - sum_i alpha_i k(., X_i)) / eps, whose squared norm is
///    (|k_a|^2 - 2 alpha^T v + alpha^T G alpha) / eps^2.
///
/// Growth of `norm` as eps shrinks signals a target outside the RKHS or
/// outside the range of C_XX. eps_grid must be strictly decreasing.
std::vector<ProbePoint> rkhs_norm_divergence_probe(std::size_t n, double sigma0, double sigma,
                                                   const ProbeTarget& target, std::span<const double> epsilon_grid,
                                                   std::uint64_t seed);

struct LimitPoint {
  double delta = 0.0;
  double distance = 0.0;  // |R(delta) - G_Y^{-1}|_F / |G_Y^{-1}|_F
};

/// Relative distance of the ridge posterior operator to G_Y^{-1} along
/// delta_grid. Throws PreconditionError unless Lambda and G_Y pass the
/// 1e-8 nonsingular screen.
std::vector<LimitPoint> limit_identity_check(const KbrWeights& weights, const GramMatrix& gy,
                                             std::span<const double> delta_grid);

}  // namespace kbr
