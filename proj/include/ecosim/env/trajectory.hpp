#pragma once

#include <ostream>
#include <vector>

#include "ecosim/env/environment.hpp"

namespace ecosim::env {

constexpr int kTrajectorySchemaVersion = 1;

/// Appends one newline-delimited JSON record for a (episode, step) pair:
/// the full StepOutcome plus the actions that produced it.
void write_trajectory_record(std::ostream& out, int episode,
                             const StepOutcome& outcome,
                             const std::vector<int>& actions);

}  // namespace ecosim::env
