#include "kbr/cli/config.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "kbr/error.hpp"

namespace kbr::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw UsageError("invalid value '" + value + "' for key '" + key + "': " + why);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, text, "expected a number");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    bad_value(key, text, "expected a nonnegative integer");
  }
  return static_cast<std::size_t>(std::stoull(s));
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, text, "expected true or false");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) bad_value(key, text, "expected a comma-separated list");
  return out;
}

std::vector<Vector> parse_points(const std::string& key, const std::string& text) {
  std::vector<Vector> out;
  for (const auto& group : split(text, ';')) {
    const auto coords = parse_list(key, group);
    out.push_back(Eigen::Map<const Vector>(coords.data(), static_cast<Eigen::Index>(coords.size())));
  }
  if (out.empty()) bad_value(key, text, "expected ';'-separated points");
  return out;
}

std::vector<Matrix> parse_square_matrices(const std::string& key, const std::string& text) {
  std::vector<Matrix> out;
  for (const auto& group : split(text, ';')) {
    const auto entries = parse_list(key, group);
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(entries.size()))));
    if (d * d != static_cast<Eigen::Index>(entries.size())) bad_value(key, text, "each matrix needs d*d entries");
    out.push_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        entries.data(), d, d));
  }
  return out;
}

std::vector<ProbeTarget> parse_targets(const std::string& key, const std::string& text) {
  std::vector<ProbeTarget> out;
  for (const auto& item : split(text, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) bad_value(key, text, "expected constant:<c> or kernel-section:<a>");
    const std::string kind = trim(item.substr(0, colon));
    const double arg = parse_double(key, item.substr(colon + 1));
    if (kind == "constant") {
      out.push_back(ConstantTarget{arg});
    } else if (kind == "kernel-section") {
      out.push_back(KernelSectionTarget{arg});
    } else {
      bad_value(key, text, "unknown target kind '" + kind + "'");
    }
  }
  return out;
}

struct Setting {
  const char* key;
  const char* help;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> apply;
};

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      {"seed", "master RNG seed",
       [](RunConfig& c, const auto& k, const auto& v) {
         const std::string s = trim(v);
         if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) bad_value(k, v, "expected a seed");
         c.spec.master_seed = std::stoull(s);
       }},
      {"replicates", "replicate count (scales sweeps down)",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.replicates_override = parse_count(k, v);
         if (*c.replicates_override == 0) bad_value(k, v, "must be positive");
         c.spec.replicates = *c.replicates_override;
       }},
      {"n-per-class", "training points per class",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.n_per_class = parse_count(k, v); }},
      {"class-means", "class means, e.g. 1,0;0,1",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.class_means = parse_points(k, v); }},
      {"class-covs", "row-major class covariances, e.g. 0.1,0,0,0.1;0.1,0,0,0.1",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.class_covs = parse_square_matrices(k, v); }},
      {"priors", "prior probabilities of C1, e.g. 0.1,0.5,0.9",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.priors = parse_list(k, v); }},
      {"test-points", "test points, e.g. 0.5,0.5;0.6,0.4",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.test_points = parse_points(k, v); }},
      {"sigma", "Gaussian kernel bandwidth for sweep-prior",
       [](RunConfig& c, const auto& k, const auto& v) { c.sigma = parse_double(k, v); }},
      {"epsilon", "KBR1 epsilon for sweep-prior",
       [](RunConfig& c, const auto& k, const auto& v) { c.epsilon = parse_double(k, v); }},
      {"delta", "KBR1 delta for sweep-prior",
       [](RunConfig& c, const auto& k, const auto& v) { c.delta = parse_double(k, v); }},
      {"sigma-grid", "sigma values for sweep-grid",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.sigma_grid = parse_list(k, v); }},
      {"epsilon-grid", "epsilon values for sweep-grid",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.epsilon_grid = parse_list(k, v); }},
      {"delta-grid", "delta values for sweep-grid",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.delta_grid = parse_list(k, v); }},
      {"pinv-tolerance", "relative singular value cutoff for KBR2 (default 1e-12*max(m,n))",
       [](RunConfig& c, const auto& k, const auto& v) {
         const double t = parse_double(k, v);
         if (!(t > 0.0 && t < 1.0)) bad_value(k, v, "must lie in (0, 1)");
         c.spec.pinv.rel_tolerance = t;
       }},
      {"threads", "worker threads, 0 = all cores (output does not depend on it)",
       [](RunConfig& c, const auto& k, const auto& v) { c.spec.threads = static_cast<unsigned>(parse_count(k, v)); }},
      {"output-dir", "output directory (default $KBR_OUTPUT_DIR or ./kbr-output)",
       [](RunConfig& c, const auto&, const auto& v) { c.output_dir = trim(v); }},
      {"plot-data", "write per-cell plot tables",
       [](RunConfig& c, const auto& k, const auto& v) { c.plot_data = parse_bool(k, v); }},
      {"plot-svg", "also render one SVG chart per cell",
       [](RunConfig& c, const auto& k, const auto& v) { c.plot_svg = parse_bool(k, v); }},
      {"n", "sample size for gram-nonsingular / weights-nonzero",
       [](RunConfig& c, const auto& k, const auto& v) { c.diag_n = parse_count(k, v); }},
      {"d", "dimension for gram-nonsingular / weights-nonzero",
       [](RunConfig& c, const auto& k, const auto& v) { c.diag_d = parse_count(k, v); }},
      {"trials", "trial count for gram-nonsingular / weights-nonzero",
       [](RunConfig& c, const auto& k, const auto& v) { c.diag_trials = parse_count(k, v); }},
      {"diag-sigma", "kernel bandwidth for gram-nonsingular / weights-nonzero",
       [](RunConfig& c, const auto& k, const auto& v) { c.diag_sigma = parse_double(k, v); }},
      {"diag-epsilon", "epsilon for weights-nonzero",
       [](RunConfig& c, const auto& k, const auto& v) { c.diag_epsilon = parse_double(k, v); }},
      {"delta-sweep", "delta values for prior-independence",
       [](RunConfig& c, const auto& k, const auto& v) { c.delta_sweep = parse_list(k, v); }},
      {"probe-n", "sample size for divergence-probe",
       [](RunConfig& c, const auto& k, const auto& v) { c.probe_n = parse_count(k, v); }},
      {"probe-sigma0", "data scale for divergence-probe",
       [](RunConfig& c, const auto& k, const auto& v) { c.probe_sigma0 = parse_double(k, v); }},
      {"probe-sigma", "kernel bandwidth for divergence-probe",
       [](RunConfig& c, const auto& k, const auto& v) { c.probe_sigma = parse_double(k, v); }},
      {"probe-targets", "targets, e.g. constant:1;kernel-section:0",
       [](RunConfig& c, const auto& k, const auto& v) { c.probe_targets = parse_targets(k, v); }},
      {"probe-epsilon-grid", "strictly decreasing epsilon values for divergence-probe",
       [](RunConfig& c, const auto& k, const auto& v) { c.probe_epsilon_grid = parse_list(k, v); }},
  };
  return table;
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::SweepPrior: return "sweep-prior";
    case Command::SweepGrid: return "sweep-grid";
    case Command::DiagnosePriorIndependence: return "diagnose prior-independence";
    case Command::DiagnoseGramNonsingular: return "diagnose gram-nonsingular";
    case Command::DiagnoseWeightsNonzero: return "diagnose weights-nonzero";
    case Command::DiagnoseDivergenceProbe: return "diagnose divergence-probe";
    case Command::Version: return "version";
    case Command::Help: return "help";
  }
  return "?";
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& s : settings()) keys.emplace_back(s.key);
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& s : settings()) {
    if (key == s.key) {
      s.apply(config, key, value);
      return;
    }
  }
  throw UsageError("unknown key '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

RunConfig parse_config(std::span<const std::string> args) {
  RunConfig config;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) config.output_dir = env;

  CLI::App app{"Kernel Bayes' rule classifiers: prior sweeps, parameter grids and diagnostics", "kbr"};
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  for (const auto& s : settings()) {
    options[s.key] = app.add_option(std::string("--") + s.key, raw[s.key], s.help);
  }
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value config file");

  auto* sweep_prior = app.add_subcommand("sweep-prior", "one (sigma, epsilon, delta) cell over priors and test points");
  auto* sweep_grid = app.add_subcommand("sweep-grid", "full sigma x epsilon x delta grid");
  auto* diagnose = app.add_subcommand("diagnose", "theoretical diagnostics");
  std::string what;
  diagnose->add_option("what", what, "prior-independence | gram-nonsingular | weights-nonzero | divergence-probe")
      ->required()
      ->check(CLI::IsMember({"prior-independence", "gram-nonsingular", "weights-nonzero", "divergence-probe"}));
  auto* version = app.add_subcommand("version", "print the version");
  for (auto* sub : {sweep_prior, sweep_grid, diagnose, version}) sub->fallthrough();
  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    config.command = Command::Help;
    config.help_text = app.help();
    return config;
  } catch (const CLI::CallForAllHelp&) {
    config.command = Command::Help;
    config.help_text = app.help("", CLI::AppFormatMode::All);
    return config;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (sweep_grid->parsed()) {
    config.command = Command::SweepGrid;
  } else if (version->parsed()) {
    config.command = Command::Version;
  } else if (diagnose->parsed()) {
    if (what == "prior-independence") config.command = Command::DiagnosePriorIndependence;
    if (what == "gram-nonsingular") config.command = Command::DiagnoseGramNonsingular;
    if (what == "weights-nonzero") config.command = Command::DiagnoseWeightsNonzero;
    if (what == "divergence-probe") config.command = Command::DiagnoseDivergenceProbe;
  }

  if (!config_path.empty()) apply_config_file(config, config_path);
  for (const auto& s : settings()) {
    if (options[s.key]->count() > 0) s.apply(config, s.key, raw[s.key]);
  }
  return config;
}

}  // namespace kbr::cli
