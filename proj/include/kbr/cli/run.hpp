#pragma once

#include <ostream>

#include "kbr/cli/config.hpp"
#include "kbr/cli/output.hpp"

namespace kbr::cli {

/// Executes a parsed configuration, writing CSV and metadata under
/// config.output_dir and progress to `log`. Returns the process exit code:
/// nonzero iff a cell or output could not be produced at all.
int run(const RunConfig& config, std::ostream& log);

/// Sidecar fields shared by every command (seed, version, RNG family, ...).
Metadata base_metadata(const RunConfig& config);

}  // namespace kbr::cli
