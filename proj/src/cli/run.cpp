#include "kbr/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <limits>
#include <sstream>

#include "kbr/error.hpp"

namespace kbr::cli {

namespace {

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_real(values[i]);
  return out;
}

std::string join_points(const std::vector<Vector>& points) {
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ";";
    for (Eigen::Index k = 0; k < points[i].size(); ++k) out += (k ? "," : "") + format_real(points[i](k));
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::size_t report_flagged(const SweepResult& result, std::ostream& log) {
  std::size_t flagged = 0;
  for (const auto& r : result.rows) {
    if (!r.flagged()) continue;
    if (flagged++ < 5) {
      log << "warning: " << to_string(r.classifier) << " sigma=" << format_real(r.sigma)
          << " epsilon=" << format_real(r.epsilon) << " delta=" << format_real(r.delta) << " prior=" << r.prior_c1
          << ": " << r.n_errors << "/" << r.n_replicates << " replicates failed (" << r.first_error << ")\n";
    }
  }
  if (flagged > 5) log << "warning: " << flagged - 5 << " more flagged rows\n";
  return flagged;
}

int write_sweep(const RunConfig& config, const SweepResult& result, const std::string& stem, Metadata meta,
                std::ostream& log) {
  const auto csv = config.output_dir / (stem + ".csv");
  emit_csv(result, csv);
  meta["rows"] = std::to_string(result.rows.size());
  meta["flagged_rows"] = std::to_string(report_flagged(result, log));
  emit_metadata(meta, config.output_dir / (stem + ".meta"));
  log << "wrote " << csv.string() << " (" << result.rows.size() << " rows)\n";
  if (config.plot_data && !result.rows.empty()) {
    const auto tables = emit_plot_data(result, config.output_dir / (stem + "_plots"), config.plot_svg);
    log << "wrote " << tables.size() << " plot tables under " << (config.output_dir / (stem + "_plots")).string()
        << "\n";
  }
  return 0;
}

int run_prior_independence(const RunConfig& config, Metadata meta, std::ostream& log) {
  const auto& spec = config.spec;
  spec.validate();
  const LabeledSample sample = generate_training_sample(spec, 0);
  Vector prior_a(2), prior_b(2);
  prior_a << spec.priors.front(), 1.0 - spec.priors.front();
  prior_b << spec.priors.back(), 1.0 - spec.priors.back();
  const Vector& y = spec.test_points.front();

  // Limit distances need Lambda and G_Y to pass the nonsingular screen.
  const DeltaKernel kx;
  const GaussianKernel ky({config.sigma});
  const std::span<const ClassLabel> labels(sample.labels);
  const GramMatrix gx = gram_matrix(labels, kx);
  const GramMatrix gy = gram_matrix(std::span<const Vector>(sample.features), ky);
  const Vector m_pi = prior_mean_vector(class_prior_mixture(prior_a), labels, kx);

  std::ostringstream os;
  os << "delta,gap,limit_distance,error\n";
  for (double delta : config.delta_sweep) {
    double gap = std::numeric_limits<double>::quiet_NaN();
    double distance = gap;
    std::string error;
    try {
      gap = prior_independence_gap(sample, prior_a, prior_b, y, config.sigma, config.epsilon, delta);
      const KbrWeights w = kbr_weights(gx, m_pi, config.epsilon);
      const double d[] = {delta};
      distance = limit_identity_check(w, gy, d).front().distance;
    } catch (const std::exception& e) {
      error = e.what();
      for (auto& ch : error) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
    }
    os << format_real(delta) << ',' << format_real(gap) << ',' << format_real(distance) << ',' << error << "\n";
  }
  const auto path = config.output_dir / "diagnose_prior_independence.csv";
  write_file_atomic(path, os.str());
  meta["sigma"] = format_real(config.sigma);
  meta["epsilon"] = format_real(config.epsilon);
  meta["delta_sweep"] = join(config.delta_sweep);
  meta["prior_a"] = format_real(prior_a(0));
  meta["prior_b"] = format_real(prior_b(0));
  meta["test_point"] = join_points({y});
  meta["nonsingular_screen"] = "sigma_min > 1e-8 * sigma_max for Lambda and G_Y";
  emit_metadata(meta, config.output_dir / "diagnose_prior_independence.meta");
  log << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

Metadata base_metadata(const RunConfig& config) {
  Metadata meta;
  meta["tool"] = "kbr";
  meta["version"] = kVersion;
  meta["command"] = command_name(config.command);
  meta["seed"] = std::to_string(config.spec.master_seed);
  meta["replicates"] = std::to_string(config.spec.replicates);
  meta["replicates_override"] =
      config.replicates_override ? std::to_string(*config.replicates_override) : std::string("none");
  meta["pinv_tolerance"] = config.spec.pinv.describe();
  meta["rng_family"] = std::string(kRngFamily);
  meta["threads"] = std::to_string(config.spec.threads);
  meta["created_utc"] = utc_now();
  return meta;
}

int run(const RunConfig& config, std::ostream& log) {
  Metadata meta = base_metadata(config);
  const auto& spec = config.spec;
  switch (config.command) {
    case Command::Help:
      log << config.help_text;
      return 0;
    case Command::Version:
      log << "kbr " << kVersion << "\n";
      return 0;
    case Command::SweepPrior: {
      meta["sigma"] = format_real(config.sigma);
      meta["epsilon"] = format_real(config.epsilon);
      meta["delta"] = format_real(config.delta);
      meta["n_per_class"] = std::to_string(spec.n_per_class);
      meta["priors"] = join(spec.priors);
      meta["test_points"] = join_points(spec.test_points);
      const SweepResult result = run_prior_sweep(spec, config.sigma, config.epsilon, config.delta);
      return write_sweep(config, result, "sweep_prior", std::move(meta), log);
    }
    case Command::SweepGrid: {
      meta["sigma_grid"] = join(spec.sigma_grid);
      meta["epsilon_grid"] = join(spec.epsilon_grid);
      meta["delta_grid"] = join(spec.delta_grid);
      meta["n_per_class"] = std::to_string(spec.n_per_class);
      meta["priors"] = join(spec.priors);
      meta["test_points"] = join_points(spec.test_points);
      const SweepResult result = run_grid_sweep(spec);
      return write_sweep(config, result, "sweep_grid", std::move(meta), log);
    }
    case Command::DiagnosePriorIndependence:
      return run_prior_independence(config, std::move(meta), log);
    case Command::DiagnoseGramNonsingular:
    case Command::DiagnoseWeightsNonzero: {
      TrialReport report;
      std::string stem;
      if (config.command == Command::DiagnoseGramNonsingular) {
        report = gram_nonsingularity_trial(config.diag_n, config.diag_d, config.diag_sigma, config.diag_trials,
                                           spec.master_seed);
        stem = "diagnose_gram_nonsingular";
      } else {
        // Two atoms drawn from the seed's dedicated stream, weights 1/2 each.
        RngStream rng(spec.master_seed, std::numeric_limits<std::uint64_t>::max());
        PriorMixture<Vector> prior{Vector::Constant(2, 0.5), {}};
        for (int j = 0; j < 2; ++j) {
          Vector atom(static_cast<Eigen::Index>(config.diag_d));
          for (Eigen::Index k = 0; k < atom.size(); ++k) atom(k) = rng.standard_normal();
          prior.atoms.push_back(atom);
        }
        report = weights_nonzero_trial(config.diag_n, config.diag_d, config.diag_sigma, config.diag_epsilon, prior,
                                       config.diag_trials, spec.master_seed);
        meta["epsilon"] = format_real(config.diag_epsilon);
        meta["prior_atoms"] = join_points(prior.atoms);
        stem = "diagnose_weights_nonzero";
      }
      meta["n"] = std::to_string(config.diag_n);
      meta["d"] = std::to_string(config.diag_d);
      meta["sigma"] = format_real(config.diag_sigma);
      meta["threshold"] = format_real(report.threshold);
      const auto path = config.output_dir / (stem + ".csv");
      emit_csv(std::span<const TrialReport>(&report, 1), path);
      emit_metadata(meta, config.output_dir / (stem + ".meta"));
      log << "wrote " << path.string() << ": " << report.passes << "/" << report.trials << " passed\n";
      return 0;
    }
    case Command::DiagnoseDivergenceProbe: {
      std::vector<ProbeSeries> series;
      for (const auto& target : config.probe_targets) {
        series.push_back({target, rkhs_norm_divergence_probe(config.probe_n, config.probe_sigma0, config.probe_sigma,
                                                             target, config.probe_epsilon_grid, spec.master_seed)});
      }
      meta["n"] = std::to_string(config.probe_n);
      meta["sigma0"] = format_real(config.probe_sigma0);
      meta["sigma"] = format_real(config.probe_sigma);
      meta["epsilon_grid"] = join(config.probe_epsilon_grid);
      meta["operator"] = "empirical covariance operator (1/n) G_X + epsilon I";
      const auto path = config.output_dir / "diagnose_divergence_probe.csv";
      emit_csv(std::span<const ProbeSeries>(series), path);
      emit_metadata(meta, config.output_dir / "diagnose_divergence_probe.meta");
      log << "wrote " << path.string() << "\n";
      return 0;
    }
  }
  return 2;
}

}  // namespace kbr::cli
