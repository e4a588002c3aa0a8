#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kbr/diagnostics.hpp"
#include "kbr/experiments.hpp"

namespace kbr::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "KBR_OUTPUT_DIR";

enum class Command {
  SweepPrior,
  SweepGrid,
  DiagnosePriorIndependence,
  DiagnoseGramNonsingular,
  DiagnoseWeightsNonzero,
  DiagnoseDivergenceProbe,
  Version,
  Help,
};

std::string command_name(Command c);

/// Everything a run needs. Defaults reproduce the two-class protocol at
/// sigma = 0.1, epsilon = delta = 1e-7.
struct RunConfig {
  Command command = Command::SweepPrior;
  ExperimentSpec spec = ExperimentSpec::paper_defaults();
  double sigma = 0.1;
  double epsilon = 1e-7;
  double delta = 1e-7;
  std::optional<std::size_t> replicates_override;
  std::filesystem::path output_dir = "kbr-output";
  bool plot_svg = false;
  bool plot_data = true;

  // diagnostics
  std::size_t diag_n = 10;
  std::size_t diag_d = 2;
  std::size_t diag_trials = 500;
  double diag_sigma = 1.0;
  double diag_epsilon = 1e-3;
  std::vector<double> delta_sweep = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 0.0};

  std::size_t probe_n = 200;
  double probe_sigma0 = 1.0;
  double probe_sigma = 1.0;
  std::vector<ProbeTarget> probe_targets = {ConstantTarget{1.0}, KernelSectionTarget{0.0}};
  std::vector<double> probe_epsilon_grid = {1e-2, 1e-4, 1e-6};

  std::string help_text;  // filled for Command::Help
};

/// Defaults, then the key=value config file named by --config, then
/// command-line flags. Unknown keys and malformed values raise UsageError
/// naming the offending key. `args` excludes the program name.
RunConfig parse_config(std::span<const std::string> args);

/// Applies one key=value assignment (config-file syntax, flag names
/// without the leading dashes).
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads a flat key=value file; '#' starts a comment.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

std::vector<std::string> known_keys();

}  // namespace kbr::cli
