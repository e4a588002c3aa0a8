#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kbr/classifiers.hpp"
#include "kbr/rng.hpp"

namespace kbr {

inline constexpr std::uint64_t kDefaultSeed = 2718281828ull;

/// Synthetic two-class protocol: n_per_class draws from each N(M_j, S_j),
/// repeated over independent replicates, evaluated over priors and test
/// points. Grids drive run_grid_sweep.
struct ExperimentSpec {
  std::size_t n_per_class = 50;
  std::vector<Vector> class_means;
  std::vector<Matrix> class_covs;
  std::size_t replicates = 100;
  std::vector<double> priors;  // Pi(C_1); C_2 gets 1 - Pi(C_1)
  std::vector<Vector> test_points;
  std::vector<double> sigma_grid;
  std::vector<double> epsilon_grid;
  std::vector<double> delta_grid;
  std::uint64_t master_seed = kDefaultSeed;
  PinvParams pinv;
  unsigned threads = 1;  // 0 = hardware concurrency; output does not depend on it

  /// M_1 = (1, 0), M_2 = (0, 1), S_1 = S_2 = diag(0.1, 0.1), 50 per class,
  /// 100 replicates, priors 0.1..0.9, three test points, and the full
  /// 8 x 8 x 5 (epsilon, delta, sigma) grid.
  static ExperimentSpec paper_defaults();

  void validate() const;
  std::size_t num_classes() const noexcept { return class_means.size(); }
};

enum class ClassifierId { BR, BR_th, KBR1, KBR2 };

inline constexpr ClassifierId kAllClassifiers[] = {ClassifierId::BR, ClassifierId::BR_th, ClassifierId::KBR1,
                                                   ClassifierId::KBR2};

std::string_view to_string(ClassifierId id);
ClassifierId classifier_from_string(std::string_view name);

struct SweepRow {
  ClassifierId classifier = ClassifierId::BR;
  double prior_c1 = 0.0;
  Vector test_point;
  double sigma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double mean_post_c1 = 0.0;  // NaN when every replicate failed
  double sem = 0.0;           // NaN with fewer than two successes
  std::size_t n_replicates = 0;
  std::size_t n_errors = 0;
  std::string first_error;

  /// More than 10% of replicates failed.
  bool flagged() const noexcept { return n_errors * 10 > n_replicates; }
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// First n_per_class points are C_1, the rest C_2. Deterministic in
/// (master_seed, replicate_index).
LabeledSample generate_training_sample(const ExperimentSpec& spec, std::size_t replicate_index);

/// Sample standard deviation (n - 1) over sqrt(m). Requires m >= 2.
double sem(std::span<const double> values);

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
};

/// Mean is accumulated relative to the first value, so a constant series
/// yields its value and SEM exactly.
MeanSem mean_and_sem(std::span<const double> values);

/// BR, BR_th, KBR1 and KBR2 over every prior and test point for one
/// (sigma, epsilon, delta) cell. Per-replicate failures are counted in
/// n_errors and excluded from the aggregate.
SweepResult run_prior_sweep(const ExperimentSpec& spec, double sigma, double epsilon, double delta);

/// Cross product sigma x epsilon x delta, one run_prior_sweep per cell.
/// replicates_override scales the run down; rows record the count used.
SweepResult run_grid_sweep(const ExperimentSpec& spec, std::optional<std::size_t> replicates_override = {});

/// Run fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). fn must only write to slot i of its outputs.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace kbr
