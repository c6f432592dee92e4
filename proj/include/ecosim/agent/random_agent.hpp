#pragma once

#include <vector>

#include "ecosim/core/rng.hpp"
#include "ecosim/env/environment.hpp"

namespace ecosim::agent {

// Uniform recommendations over the candidate snapshot; an empty candidate set
// yields all kNoRecommendation (the episode-end signal).
std::vector<int> random_actions(const env::Observation& observation, int num_users,
                                core::RngStream& rng);

}  // namespace ecosim::agent
