#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ecosim/agent/eco_agent.hpp"
#include "ecosim/core/config.hpp"
#include "ecosim/env/environment.hpp"

namespace ecosim::harness {

/// Split of one provider-step reward r^c across the additive parts of the
/// feedback p^c = mu + eta1*m + eta2*sum_r. The exposure and feedback shares
/// are (component / p^c) * r^c; the drift share is the remainder, so the
/// three always sum to r^c exactly. A zero-feedback step leaves satisfaction
/// unchanged, so every part is zero.
struct RewardDecomposition {
  double drift_part = 0.0;
  double rec_part = 0.0;
  double feedback_part = 0.0;
};

RewardDecomposition decompose_provider_reward(const env::ProviderOutcome& outcome,
                                              const core::ProviderState& provider);

/// Per-episode aggregates. Reward fields are sums over entities and steps;
/// per-capita views are derived at aggregation time.
struct RolloutMetrics {
  double user_reward_sum = 0.0;
  double provider_reward_sum = 0.0;
  int viable_end = 0;
  std::vector<int> viable_series;  // viable provider count after each step
  double drift_part = 0.0;
  double rec_part = 0.0;
  double feedback_part = 0.0;
  std::vector<double> group_recommendations;  // per provider group
  std::vector<double> group_viable_end;

  // Model-side quantities, filled only when uplift collection is on.
  double event_user_return_sum = 0.0;
  double event_uplift_sum = 0.0;
  long long event_count = 0;
  std::vector<std::pair<double, double>> scatter;  // (satisfaction at decision, uplift)
};

struct RolloutOptions {
  bool greedy = false;
  bool keep_episode = false;     // hand back the EpisodeData for training
  bool collect_uplifts = false;  // run the uplift model over the finished episode
};

struct RolloutResult {
  RolloutMetrics metrics;
  agent::EpisodeData episode;  // populated when keep_episode is set
};

RolloutResult run_eco_episode(const agent::EcoAgent& agent,
                              const core::EnvironmentConfig& config,
                              std::uint64_t env_seed, std::uint64_t action_seed,
                              const RolloutOptions& options);

RolloutMetrics run_random_episode(const core::EnvironmentConfig& config,
                                  std::uint64_t env_seed, std::uint64_t action_seed);

}  // namespace ecosim::harness
