#include "kbr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kbr/rng.hpp"

namespace kbr {

namespace {

constexpr double kGramThreshold = 1e-10;
constexpr double kWeightsThreshold = 1e-14;

std::vector<Vector> draw_standard_normal_points(std::size_t n, std::size_t d, RngStream& rng) {
  std::vector<Vector> points(n, Vector(static_cast<Eigen::Index>(d)));
  for (auto& p : points) {
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) = rng.standard_normal();
  }
  return points;
}

void summarize(TrialReport& report, std::vector<double> stats) {
  report.trials = stats.size();
  report.passes = static_cast<std::size_t>(
      std::count_if(stats.begin(), stats.end(), [&](double s) { return s > report.threshold; }));
  if (stats.empty()) return;
  std::sort(stats.begin(), stats.end());
  report.min_statistic = stats.front();
  const std::size_t mid = stats.size() / 2;
  report.median_statistic = stats.size() % 2 ? stats[mid] : 0.5 * (stats[mid - 1] + stats[mid]);
}

}  // namespace

bool passes_nonsingular_screen(const Matrix& a, double ratio) { return inverse_condition(a) > ratio; }

double prior_independence_gap(const LabeledSample& sample, const Vector& prior_a, const Vector& prior_b,
                              const Vector& y, double sigma, double epsilon, double delta) {
  if (!(prior_a.array() > 0.0).all() || !(prior_b.array() > 0.0).all()) {
    throw InvalidInput("prior_independence_gap: priors must be strictly positive");
  }
  const Vector a = kbr1_posterior(sample, prior_a, y, sigma, epsilon, delta).values;
  const Vector b = kbr1_posterior(sample, prior_b, y, sigma, epsilon, delta).values;
  return (a - b).cwiseAbs().maxCoeff();
}

TrialReport gram_nonsingularity_trial(std::size_t n, std::size_t d, double sigma, std::size_t trials,
                                      std::uint64_t seed) {
  if (trials == 0 || n == 0 || d == 0) throw InvalidInput("gram_nonsingularity_trial: n, d, trials must be positive");
  const GaussianKernel kernel({sigma});
  TrialReport report{"gram_nonsingular", "sigma_min/sigma_max of G", kGramThreshold};
  report.seed = seed;
  std::vector<double> stats(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream rng(seed, t);
    const auto points = draw_standard_normal_points(n, d, rng);
    stats[t] = inverse_condition(gram_matrix(std::span<const Vector>(points), kernel).entries);
  }
  summarize(report, std::move(stats));
  return report;
}

TrialReport weights_nonzero_trial(std::size_t n, std::size_t d, double sigma, double epsilon,
                                  const PriorMixture<Vector>& prior, std::size_t trials, std::uint64_t seed) {
  if (trials == 0 || n == 0 || d == 0) throw InvalidInput("weights_nonzero_trial: n, d, trials must be positive");
  if (!(epsilon > 0.0)) throw InvalidInput("weights_nonzero_trial: epsilon must be positive");
  prior.validate();
  for (const auto& atom : prior.atoms) {
    if (static_cast<std::size_t>(atom.size()) != d) throw InvalidInput("weights_nonzero_trial: atom dimension mismatch");
  }
  const GaussianKernel kernel({sigma});
  TrialReport report{"weights_nonzero", "min|mu_i|/max|mu_i|", kWeightsThreshold};
  report.seed = seed;
  std::vector<double> stats(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream rng(seed, t);
    const auto points = draw_standard_normal_points(n, d, rng);
    const std::span<const Vector> pts(points);
    const GramMatrix gx = gram_matrix(pts, kernel);
    const Vector m_pi = prior_mean_vector(prior, pts, kernel);
    const Vector mu = kbr_weights(gx, m_pi, epsilon).mu.cwiseAbs();
    const double hi = mu.maxCoeff();
    stats[t] = hi > 0.0 ? mu.minCoeff() / hi : 0.0;
  }
  summarize(report, std::move(stats));
  return report;
}

std::string describe(const ProbeTarget& target) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* c = std::get_if<ConstantTarget>(&target)) {
    os << "constant(" << c->value << ")";
  } else {
    os << "kernel_section(" << std::get<KernelSectionTarget>(target).center << ")";
  }
  return os.str();
}

std::vector<ProbePoint> rkhs_norm_divergence_probe(std::size_t n, double sigma0, double sigma,
                                                   const ProbeTarget& target, std::span<const double> epsilon_grid,
                                                   std::uint64_t seed) {
  if (n < 10) throw InvalidInput("divergence probe: n must be at least 10");
  if (!(sigma0 > 0.0)) throw InvalidInput("divergence probe: sigma0 must be positive");
  if (epsilon_grid.empty()) throw InvalidInput("divergence probe: empty epsilon grid");
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    if (!(epsilon_grid[i] > 0.0) || (i > 0 && !(epsilon_grid[i] < epsilon_grid[i - 1]))) {
      throw InvalidInput("divergence probe: epsilon grid must be positive and strictly decreasing");
    }
  }
  const GaussianKernel kernel({sigma});

  RngStream rng(seed, 0);
  std::vector<Vector> points(n, Vector(1));
  for (auto& p : points) p(0) = sigma0 * rng.standard_normal();
  const std::span<const Vector> pts(points);
  const Matrix g = gram_matrix(pts, kernel).entries;

  const auto nn = static_cast<double>(n);
  Vector v(static_cast<Eigen::Index>(n));
  double target_norm_sq = 0.0;
  const bool is_section = std::holds_alternative<KernelSectionTarget>(target);
  if (is_section) {
    const Vector center = Vector::Constant(1, std::get<KernelSectionTarget>(target).center);
    const double scale = std::sqrt(2.0 * std::numbers::pi) * sigma;
    v = scale * kernel_vector(pts, center, kernel);
    // |k_a|^2 = scale^2 k(a, a) = sqrt(2 pi) sigma
    target_norm_sq = scale;
  } else {
    v.setConstant(std::get<ConstantTarget>(target).value);
  }

  const Matrix g_over_n = g / nn;
  std::vector<ProbePoint> series;
  for (double eps : epsilon_grid) {
    const Vector alpha = solve_ridge(g_over_n, v / nn, {eps}, "divergence_probe");
    const double fit_sq = std::max(alpha.dot(g * alpha), 0.0);
    ProbePoint point{eps, std::sqrt(fit_sq), std::sqrt(fit_sq)};
    if (is_section) {
      const double residual_sq = std::max(target_norm_sq - 2.0 * alpha.dot(v) + fit_sq, 0.0);
      point.norm = std::sqrt(residual_sq) / eps;
    }
    series.push_back(point);
  }
  return series;
}

std::vector<LimitPoint> limit_identity_check(const KbrWeights& weights, const GramMatrix& gy,
                                             std::span<const double> delta_grid) {
  const Matrix lambda = weights.mu.asDiagonal();
  if (!passes_nonsingular_screen(lambda) || !passes_nonsingular_screen(gy.entries)) {
    throw PreconditionError("limit_identity_check: Lambda or G_Y fails the nonsingular screen");
  }
  const auto n = gy.size();
  const Matrix gy_inv = solve_general(gy.entries, Matrix::Identity(n, n), "limit_identity_check");
  const double ref = gy_inv.norm();
  std::vector<LimitPoint> out;
  for (double delta : delta_grid) {
    const Matrix r = posterior_operator_ridge(weights, gy, delta).matrix;
    out.push_back({delta, (r - gy_inv).norm() / ref});
  }
  return out;
}

}  // namespace kbr
