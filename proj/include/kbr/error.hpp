#pragma once

#include <stdexcept>
#include <string>

namespace kbr {

/// Malformed arguments: dimension mismatches, out-of-range parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear system was numerically singular. `estimate` carries the
/// smallest-eigenvalue (symmetric path) or reciprocal-condition
/// (general path) estimate that tripped the check.
class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(std::string stage, double estimate, const std::string& detail)
      : std::runtime_error(stage + ": numerically singular system (" + detail + ")"),
        stage_(std::move(stage)),
        estimate_(estimate) {}

  const std::string& stage() const noexcept { return stage_; }
  double estimate() const noexcept { return estimate_; }

 private:
  std::string stage_;
  double estimate_;
};

/// Gaussian class statistics could not be fitted (too few points or a
/// singular covariance).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every class density underflowed at the query point.
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A diagnostic's precondition screen rejected its inputs.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command line or config file value.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kbr
