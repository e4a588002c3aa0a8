#pragma once

#include <cstddef>
#include <vector>

#include "kbr/embedding.hpp"
#include "kbr/kernels.hpp"
#include "kbr/numerics.hpp"

namespace kbr {

/// Paired (class label, feature vector) training observations.
struct LabeledSample {
  std::vector<ClassLabel> labels;
  std::vector<Vector> features;
  std::size_t num_classes = 0;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(labels.size()); }
  Eigen::Index dim() const noexcept { return features.empty() ? 0 : features.front().size(); }

  /// Equal lengths, labels below num_classes, one common feature dimension.
  void validate() const;
};

struct ClassGaussian {
  Vector mean;
  Matrix covariance;
};

struct GaussianClassStats {
  std::vector<ClassGaussian> classes;

  /// Known parameters, as used by the BR_th reference classifier.
  static GaussianClassStats from_parameters(const std::vector<Vector>& means, const std::vector<Matrix>& covariances);
};

/// Per-class posterior values. KBR outputs are raw inner products and carry
/// normalized == false: they may be negative or fail to sum to one.
struct PosteriorProbs {
  Vector values;
  bool normalized = false;
};

/// Per-class sample mean and (n_j - 1)-denominator covariance. Each class
/// needs at least d + 1 points and a nonsingular covariance.
GaussianClassStats fit_gaussian_stats(const LabeledSample& sample);

double gaussian_density(const Vector& y, const Vector& mean, const Matrix& cov);

/// Parametric Bayes' rule with Gaussian class likelihoods. The prior must be
/// nonnegative and sum to 1 within 1e-12.
PosteriorProbs br_posterior(const GaussianClassStats& stats, const Vector& prior, const Vector& y);

/// BR with the true class means and covariances.
PosteriorProbs br_th_posterior(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                               const Vector& prior, const Vector& y);

/// D(i, j) = 1 iff sample point j belongs to class i.
Matrix indicator_matrix(const LabeledSample& sample, std::size_t num_classes);

/// Prior over classes as a kernel mixture with atoms C_1..C_g.
PriorMixture<ClassLabel> class_prior_mixture(const Vector& prior);

/// A fitted KBR1/KBR2 posterior operator together with what is needed to
/// evaluate D R k_Y(y) at new observations.
class KbrClassifier {
 public:
  KbrClassifier(std::vector<Vector> features, GaussianKernel y_kernel, Matrix indicator, PosteriorOperator op);

  PosteriorProbs posterior(const Vector& y) const;
  const PosteriorOperator& op() const noexcept { return op_; }
  const Matrix& indicator() const noexcept { return indicator_; }

 private:
  std::vector<Vector> features_;
  GaussianKernel y_kernel_;
  Matrix indicator_;
  PosteriorOperator op_;
};

/// Delta kernel on labels, Gaussian(sigma) on features, ridge operator
/// with (epsilon, delta).
KbrClassifier fit_kbr1(const LabeledSample& sample, const Vector& prior, double sigma, double epsilon, double delta);

/// Same kernels, Moore-Penrose operator.
KbrClassifier fit_kbr2(const LabeledSample& sample, const Vector& prior, double sigma, const PinvParams& pinv = {});

PosteriorProbs kbr1_posterior(const LabeledSample& sample, const Vector& prior, const Vector& y, double sigma,
                              double epsilon, double delta);

PosteriorProbs kbr2_posterior(const LabeledSample& sample, const Vector& prior, const Vector& y, double sigma,
                              const PinvParams& pinv = {});

}  // namespace kbr
