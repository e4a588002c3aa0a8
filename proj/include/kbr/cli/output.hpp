#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kbr/diagnostics.hpp"
#include "kbr/experiments.hpp"

namespace kbr::cli {

/// Exact SweepResult CSV header.
inline constexpr const char* kSweepHeader =
    "classifier,prior_c1,test_x,test_y,sigma,epsilon,delta,mean_post_c1,sem,n_replicates,n_errors";

/// %.17g rendering used for every floating-point CSV field.
std::string format_real(double v);

/// Writes `contents` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string sweep_csv(const SweepResult& result);
std::string trial_csv(std::span<const TrialReport> reports);

struct ProbeSeries {
  ProbeTarget target;
  std::vector<ProbePoint> points;
};
std::string probe_csv(std::span<const ProbeSeries> series);

/// Header row then one row per SweepRow. Test points must be 2-dimensional.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
void emit_csv(std::span<const TrialReport> reports, const std::filesystem::path& path);
void emit_csv(std::span<const ProbeSeries> series, const std::filesystem::path& path);

/// Parses a file written by emit_csv(SweepResult).
SweepResult read_sweep_csv(const std::filesystem::path& path);

/// Flat key=value sidecar. Keys are written in sorted order.
using Metadata = std::map<std::string, std::string>;
void emit_metadata(const Metadata& meta, const std::filesystem::path& path);
Metadata read_metadata(const std::filesystem::path& path);

/// One table per (test point, epsilon, delta, sigma) cell: one row per prior,
/// columns <classifier>_mean, _lower, _upper for BR, BR_th, KBR1, KBR2.
/// With `svg`, a line chart is written next to each table. Returns the
/// table paths in cell order.
std::vector<std::filesystem::path> emit_plot_data(const SweepResult& result, const std::filesystem::path& dir,
                                                  bool svg = false);

}  // namespace kbr::cli
