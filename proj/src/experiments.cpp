#include "kbr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace kbr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One replicate's posterior for C_1, or the error that prevented it.
struct Outcome {
  double value = kNaN;
  std::string error;
  bool ok() const noexcept { return error.empty(); }
};

// outcomes[classifier][prior][test point] for a single replicate.
using ReplicateOutcomes = std::vector<std::vector<std::vector<Outcome>>>;

std::string describe_exception(const std::exception& e) { return e.what()[0] ? e.what() : "unknown error"; }

Vector prior_vector(double p) {
  Vector prior(2);
  prior << p, 1.0 - p;
  return prior;
}

Outcome take_c1(const PosteriorProbs& probs) {
  const double v = probs.values(0);
  if (!std::isfinite(v)) return {kNaN, "non-finite posterior"};
  return {v, {}};
}

ReplicateOutcomes evaluate_replicate(const ExperimentSpec& spec, std::size_t replicate, double sigma,
                                     double epsilon, double delta) {
  const std::size_t np = spec.priors.size();
  const std::size_t nt = spec.test_points.size();
  ReplicateOutcomes out(std::size(kAllClassifiers), std::vector<std::vector<Outcome>>(np, std::vector<Outcome>(nt)));

  const LabeledSample sample = generate_training_sample(spec, replicate);
  const auto truth = GaussianClassStats::from_parameters(spec.class_means, spec.class_covs);

  std::optional<GaussianClassStats> fitted;
  std::string fit_error;
  try {
    fitted = fit_gaussian_stats(sample);
  } catch (const std::exception& e) {
    fit_error = describe_exception(e);
  }

  for (std::size_t p = 0; p < np; ++p) {
    const Vector prior = prior_vector(spec.priors[p]);

    auto fill_br = [&](std::size_t slot, const GaussianClassStats* stats, const std::string& err) {
      for (std::size_t t = 0; t < nt; ++t) {
        if (!stats) {
          out[slot][p][t] = {kNaN, err};
          continue;
        }
        try {
          out[slot][p][t] = take_c1(br_posterior(*stats, prior, spec.test_points[t]));
        } catch (const std::exception& e) {
          out[slot][p][t] = {kNaN, describe_exception(e)};
        }
      }
    };
    fill_br(0, fitted ? &*fitted : nullptr, fit_error);
    fill_br(1, &truth, {});

    auto fill_kbr = [&](std::size_t slot, auto&& fit) {
      try {
        const KbrClassifier clf = fit();
        for (std::size_t t = 0; t < nt; ++t) out[slot][p][t] = take_c1(clf.posterior(spec.test_points[t]));
      } catch (const std::exception& e) {
        for (std::size_t t = 0; t < nt; ++t) out[slot][p][t] = {kNaN, describe_exception(e)};
      }
    };
    fill_kbr(2, [&] { return fit_kbr1(sample, prior, sigma, epsilon, delta); });
    fill_kbr(3, [&] { return fit_kbr2(sample, prior, sigma, spec.pinv); });
  }
  return out;
}

}  // namespace

ExperimentSpec ExperimentSpec::paper_defaults() {
  ExperimentSpec spec;
  spec.class_means = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
  const Matrix s = 0.1 * Matrix::Identity(2, 2);
  spec.class_covs = {s, s};
  for (int i = 1; i <= 9; ++i) spec.priors.push_back(i / 10.0);
  spec.test_points = {Vector::Constant(2, 0.5), (Vector(2) << 0.6, 0.4).finished(),
                      (Vector(2) << 0.7, 0.3).finished()};
  spec.sigma_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  for (int e = 1; e <= 15; e += 2) {
    spec.epsilon_grid.push_back(std::pow(10.0, -e));
    spec.delta_grid.push_back(std::pow(10.0, -e));
  }
  return spec;
}

void ExperimentSpec::validate() const {
  if (n_per_class == 0) throw InvalidInput("experiment: n_per_class must be positive");
  if (replicates == 0) throw InvalidInput("experiment: replicates must be positive");
  if (class_means.size() != 2 || class_covs.size() != 2) {
    throw InvalidInput("experiment: the protocol has exactly two classes");
  }
  const auto d = class_means.front().size();
  for (std::size_t j = 0; j < 2; ++j) {
    if (class_means[j].size() != d || class_covs[j].rows() != d || class_covs[j].cols() != d) {
      throw InvalidInput("experiment: inconsistent class parameter dimensions");
    }
    if (Eigen::LLT<Matrix>(class_covs[j]).info() != Eigen::Success) {
      throw InvalidInput("experiment: class covariance is not SPD");
    }
  }
  if (priors.empty() || test_points.empty() || sigma_grid.empty() || epsilon_grid.empty() || delta_grid.empty()) {
    throw InvalidInput("experiment: priors, test points and grids must be nonempty");
  }
  for (double p : priors) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("experiment: priors must lie in (0, 1)");
  }
  for (const auto& y : test_points) {
    if (y.size() != d) throw InvalidInput("experiment: test point dimension mismatch");
  }
  for (double s : sigma_grid) {
    if (!(s > 0.0)) throw InvalidInput("experiment: sigma must be positive");
  }
  for (const auto* grid : {&epsilon_grid, &delta_grid}) {
    for (double v : *grid) {
      if (!(v >= 0.0)) throw InvalidInput("experiment: epsilon and delta must be nonnegative");
    }
  }
  pinv.resolve(1, 1);
}

std::string_view to_string(ClassifierId id) {
  switch (id) {
    case ClassifierId::BR: return "BR";
    case ClassifierId::BR_th: return "BR_th";
    case ClassifierId::KBR1: return "KBR1";
    case ClassifierId::KBR2: return "KBR2";
  }
  return "?";
}

ClassifierId classifier_from_string(std::string_view name) {
  for (auto id : kAllClassifiers) {
    if (to_string(id) == name) return id;
  }
  throw InvalidInput("unknown classifier '" + std::string(name) + "'");
}

LabeledSample generate_training_sample(const ExperimentSpec& spec, std::size_t replicate_index) {
  if (replicate_index >= spec.replicates) {
    throw InvalidInput("generate_training_sample: replicate index " + std::to_string(replicate_index) +
                       " out of range");
  }
  RngStream rng(spec.master_seed, replicate_index);
  LabeledSample sample;
  sample.num_classes = 2;
  sample.labels.reserve(2 * spec.n_per_class);
  sample.features.reserve(2 * spec.n_per_class);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t i = 0; i < spec.n_per_class; ++i) {
      sample.labels.push_back(ClassLabel{j});
      sample.features.push_back(sample_mvnormal(spec.class_means[j], spec.class_covs[j], rng));
    }
  }
  return sample;
}

double sem(std::span<const double> values) {
  if (values.size() < 2) throw InvalidInput("sem: need at least two values");
  return mean_and_sem(values).sem;
}

MeanSem mean_and_sem(std::span<const double> values) {
  if (values.empty()) return {kNaN, kNaN};
  const double shift = values.front();
  const double m = static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += v - shift;
  const double mean = shift + acc / m;
  if (values.size() < 2) return {mean, kNaN};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (m - 1.0)) / std::sqrt(m)};
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SweepResult run_prior_sweep(const ExperimentSpec& spec, double sigma, double epsilon, double delta) {
  spec.validate();
  std::vector<ReplicateOutcomes> per_replicate(spec.replicates);
  parallel_for(spec.replicates, spec.threads, [&](std::size_t r) {
    per_replicate[r] = evaluate_replicate(spec, r, sigma, epsilon, delta);
  });

  SweepResult result;
  std::vector<double> values;
  values.reserve(spec.replicates);
  for (std::size_t c = 0; c < std::size(kAllClassifiers); ++c) {
    for (std::size_t t = 0; t < spec.test_points.size(); ++t) {
      for (std::size_t p = 0; p < spec.priors.size(); ++p) {
        SweepRow row;
        row.classifier = kAllClassifiers[c];
        row.prior_c1 = spec.priors[p];
        row.test_point = spec.test_points[t];
        row.sigma = sigma;
        row.epsilon = epsilon;
        row.delta = delta;
        row.n_replicates = spec.replicates;
        values.clear();
        for (const auto& rep : per_replicate) {
          const Outcome& o = rep[c][p][t];
          if (o.ok()) {
            values.push_back(o.value);
          } else {
            if (row.n_errors++ == 0) row.first_error = o.error;
          }
        }
        const MeanSem agg = mean_and_sem(values);
        row.mean_post_c1 = agg.mean;
        row.sem = agg.sem;
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

SweepResult run_grid_sweep(const ExperimentSpec& spec, std::optional<std::size_t> replicates_override) {
  ExperimentSpec scaled = spec;
  if (replicates_override) scaled.replicates = *replicates_override;
  scaled.validate();
  SweepResult result;
  for (double sigma : scaled.sigma_grid) {
    for (double epsilon : scaled.epsilon_grid) {
      for (double delta : scaled.delta_grid) {
        auto cell = run_prior_sweep(scaled, sigma, epsilon, delta);
        std::move(cell.rows.begin(), cell.rows.end(), std::back_inserter(result.rows));
      }
    }
  }
  return result;
}

}  // namespace kbr
