#include "kbr/classifiers.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace kbr {

namespace {

std::string class_name(std::size_t id) { return "C" + std::to_string(id + 1); }

void validate_normalized_prior(const Vector& prior, std::size_t num_classes) {
  if (static_cast<std::size_t>(prior.size()) != num_classes) {
    throw InvalidInput("prior: expected " + std::to_string(num_classes) + " entries, got " +
                       std::to_string(prior.size()));
  }
  if (!prior.allFinite() || (prior.array() < 0.0).any()) {
    throw InvalidInput("prior: entries must be finite and nonnegative");
  }
  if (std::abs(prior.sum() - 1.0) > 1e-12) throw InvalidInput("prior: entries must sum to 1");
}

void validate_kbr_prior(const Vector& prior, std::size_t num_classes) {
  if (static_cast<std::size_t>(prior.size()) != num_classes) {
    throw InvalidInput("prior: expected " + std::to_string(num_classes) + " entries, got " +
                       std::to_string(prior.size()));
  }
  if (!prior.allFinite()) throw InvalidInput("prior: non-finite entry");
}

struct KbrGrams {
  GramMatrix gx;
  GramMatrix gy;
  Vector m_pi;
};

KbrGrams build_grams(const LabeledSample& sample, const Vector& prior, const GaussianKernel& ky) {
  sample.validate();
  validate_kbr_prior(prior, sample.num_classes);
  const DeltaKernel kx;
  const std::span<const ClassLabel> labels(sample.labels);
  const std::span<const Vector> features(sample.features);
  GramMatrix gx = gram_matrix(labels, kx);
  GramMatrix gy = gram_matrix(features, ky);
  Vector m_pi = prior_mean_vector(class_prior_mixture(prior), labels, kx);
  return {std::move(gx), std::move(gy), std::move(m_pi)};
}

}  // namespace

void LabeledSample::validate() const {
  if (labels.empty()) throw InvalidInput("labeled sample: empty");
  if (labels.size() != features.size()) throw InvalidInput("labeled sample: labels and features differ in length");
  const auto d = features.front().size();
  if (d == 0) throw InvalidInput("labeled sample: zero-dimensional features");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].id >= num_classes) {
      throw InvalidInput("labeled sample: label " + std::to_string(labels[i].id) + " outside class list of size " +
                         std::to_string(num_classes));
    }
    if (features[i].size() != d) throw InvalidInput("labeled sample: inconsistent feature dimension");
  }
}

GaussianClassStats GaussianClassStats::from_parameters(const std::vector<Vector>& means,
                                                       const std::vector<Matrix>& covariances) {
  if (means.empty() || means.size() != covariances.size()) {
    throw InvalidInput("class parameters: means and covariances must have equal nonzero length");
  }
  GaussianClassStats stats;
  for (std::size_t j = 0; j < means.size(); ++j) {
    const auto d = means[j].size();
    if (covariances[j].rows() != d || covariances[j].cols() != d) {
      throw InvalidInput("class parameters: covariance shape mismatch for " + class_name(j));
    }
    if (Eigen::LLT<Matrix>(covariances[j]).info() != Eigen::Success) {
      throw InvalidInput("class parameters: covariance of " + class_name(j) + " is not SPD");
    }
    stats.classes.push_back({means[j], covariances[j]});
  }
  return stats;
}

GaussianClassStats fit_gaussian_stats(const LabeledSample& sample) {
  sample.validate();
  const auto d = sample.dim();
  GaussianClassStats stats;
  for (std::size_t j = 0; j < sample.num_classes; ++j) {
    std::vector<const Vector*> members;
    for (std::size_t i = 0; i < sample.labels.size(); ++i) {
      if (sample.labels[i].id == j) members.push_back(&sample.features[i]);
    }
    const auto count = static_cast<Eigen::Index>(members.size());
    if (count < d + 1) {
      throw FitError("fit_gaussian_stats: class " + class_name(j) + " has " + std::to_string(count) +
                     " points, needs at least " + std::to_string(d + 1));
    }
    Vector mean = Vector::Zero(d);
    for (const auto* x : members) mean += *x;
    mean /= static_cast<double>(count);
    Matrix cov = Matrix::Zero(d, d);
    for (const auto* x : members) {
      const Vector c = *x - mean;
      cov.noalias() += c * c.transpose();
    }
    cov /= static_cast<double>(count - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 1e-14 * hi) || !(hi > 0.0)) {
      throw FitError("fit_gaussian_stats: covariance of class " + class_name(j) + " is singular");
    }
    stats.classes.push_back({std::move(mean), std::move(cov)});
  }
  return stats;
}

double gaussian_density(const Vector& y, const Vector& mean, const Matrix& cov) {
  const auto d = mean.size();
  if (y.size() != d || cov.rows() != d || cov.cols() != d || d == 0) {
    throw InvalidInput("gaussian_density: dimension mismatch");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(cov.cwiseAbs().maxCoeff(), 1.0)) {
    throw InvalidInput("gaussian_density: covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw InvalidInput("gaussian_density: covariance is not SPD");
  const Vector z = llt.matrixL().solve(y - mean);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_norm = 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
  return std::exp(-0.5 * z.squaredNorm() - log_norm);
}

PosteriorProbs br_posterior(const GaussianClassStats& stats, const Vector& prior, const Vector& y) {
  const auto g = stats.classes.size();
  validate_normalized_prior(prior, g);
  Vector joint(static_cast<Eigen::Index>(g));
  for (std::size_t j = 0; j < g; ++j) {
    const auto& c = stats.classes[j];
    joint(static_cast<Eigen::Index>(j)) = gaussian_density(y, c.mean, c.covariance) * prior(static_cast<Eigen::Index>(j));
  }
  const double total = joint.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateInput("br_posterior: every class density underflows at the query point");
  }
  return {joint / total, true};
}

PosteriorProbs br_th_posterior(const std::vector<Vector>& means, const std::vector<Matrix>& covariances,
                               const Vector& prior, const Vector& y) {
  return br_posterior(GaussianClassStats::from_parameters(means, covariances), prior, y);
}

Matrix indicator_matrix(const LabeledSample& sample, std::size_t num_classes) {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(num_classes), sample.size());
  for (std::size_t j = 0; j < sample.labels.size(); ++j) {
    const auto id = sample.labels[j].id;
    if (id >= num_classes) throw InvalidInput("indicator_matrix: label outside class list");
    d(static_cast<Eigen::Index>(id), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return d;
}

PriorMixture<ClassLabel> class_prior_mixture(const Vector& prior) {
  PriorMixture<ClassLabel> mixture{prior, {}};
  for (Eigen::Index j = 0; j < prior.size(); ++j) mixture.atoms.push_back(ClassLabel{static_cast<std::size_t>(j)});
  return mixture;
}

KbrClassifier::KbrClassifier(std::vector<Vector> features, GaussianKernel y_kernel, Matrix indicator,
                             PosteriorOperator op)
    : features_(std::move(features)), y_kernel_(y_kernel), indicator_(std::move(indicator)), op_(std::move(op)) {}

PosteriorProbs KbrClassifier::posterior(const Vector& y) const {
  const Vector ky = kernel_vector(std::span<const Vector>(features_), y, y_kernel_);
  return {indicator_ * posterior_embedding_weights(op_, ky), false};
}

KbrClassifier fit_kbr1(const LabeledSample& sample, const Vector& prior, double sigma, double epsilon,
                       double delta) {
  const GaussianKernel ky({sigma});
  auto grams = build_grams(sample, prior, ky);
  const KbrWeights weights = kbr_weights(grams.gx, grams.m_pi, epsilon);
  PosteriorOperator op = posterior_operator_ridge(weights, grams.gy, delta);
  return {sample.features, ky, indicator_matrix(sample, sample.num_classes), std::move(op)};
}

KbrClassifier fit_kbr2(const LabeledSample& sample, const Vector& prior, double sigma, const PinvParams& pinv) {
  const GaussianKernel ky({sigma});
  auto grams = build_grams(sample, prior, ky);
  PosteriorOperator op = posterior_operator_pinv(grams.gx, grams.m_pi, grams.gy, pinv);
  return {sample.features, ky, indicator_matrix(sample, sample.num_classes), std::move(op)};
}

PosteriorProbs kbr1_posterior(const LabeledSample& sample, const Vector& prior, const Vector& y, double sigma,
                              double epsilon, double delta) {
  return fit_kbr1(sample, prior, sigma, epsilon, delta).posterior(y);
}

PosteriorProbs kbr2_posterior(const LabeledSample& sample, const Vector& prior, const Vector& y, double sigma,
                              const PinvParams& pinv) {
  return fit_kbr2(sample, prior, sigma, pinv).posterior(y);
}

}  // namespace kbr
