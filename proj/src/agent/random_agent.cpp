#include "ecosim/agent/random_agent.hpp"

namespace ecosim::agent {

std::vector<int> random_actions(const env::Observation& observation, int num_users,
                                core::RngStream& rng) {
  std::vector<int> actions(static_cast<std::size_t>(num_users),
                           env::Environment::kNoRecommendation);
  if (observation.candidates.empty()) return actions;
  for (auto& action : actions)
    action = observation.candidates[rng.next_below(observation.candidates.size())].doc_id;
  return actions;
}

}  // namespace ecosim::agent
