#pragma once

#include <string>
#include <vector>

namespace ecosim::cli {

/// Parses command-line arguments (program name excluded), dispatches to one
/// of the subcommands (train, evaluate, sweep, plot, selftest), and returns
/// the process exit code: 0 on success, 1 on a validation error (bad flags,
/// unknown scenario, invalid configuration), 2 on a runtime failure (I/O,
/// diverged training, failed self-test).
///
/// Progress goes to standard error; machine-readable output goes to files
/// under the --out directory only.
int run(const std::vector<std::string>& args);

}  // namespace ecosim::cli
