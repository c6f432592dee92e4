#include "ecosim/harness/rollout.hpp"

#include <utility>

#include "ecosim/agent/random_agent.hpp"
#include "ecosim/core/rng.hpp"

namespace ecosim::harness {

namespace {

void init_group_slots(RolloutMetrics& metrics, const core::EnvironmentConfig& config) {
  metrics.group_recommendations.assign(config.provider_groups.size(), 0.0);
  metrics.group_viable_end.assign(config.provider_groups.size(), 0.0);
}

void accumulate_step(RolloutMetrics& metrics, const env::StepOutcome& outcome,
                     const env::Environment& environment) {
  for (double r : outcome.user_rewards) metrics.user_reward_sum += r;
  for (const auto& po : outcome.providers) {
    const auto& provider = environment.providers()[static_cast<std::size_t>(po.provider_id)];
    metrics.provider_reward_sum += po.reward;
    const RewardDecomposition parts = decompose_provider_reward(po, provider);
    metrics.drift_part += parts.drift_part;
    metrics.rec_part += parts.rec_part;
    metrics.feedback_part += parts.feedback_part;
    metrics.group_recommendations[static_cast<std::size_t>(provider.group)] +=
        static_cast<double>(po.recommendation_count);
  }
  metrics.viable_series.push_back(environment.viable_provider_count());
}

void finish_episode(RolloutMetrics& metrics, const env::Environment& environment) {
  metrics.viable_end = environment.viable_provider_count();
  for (const auto& provider : environment.providers()) {
    if (provider.viable) {
      metrics.group_viable_end[static_cast<std::size_t>(provider.group)] += 1.0;
    }
  }
}

// Pairs every event with its model uplift and the satisfaction the recommended
// provider had when the action was chosen.
void fill_uplift_metrics(const agent::EcoAgent& agent, agent::EpisodeData& episode,
                         RolloutMetrics& metrics) {
  agent.compute_event_uplifts(episode);
  std::vector<std::vector<double>> returns(episode.user_histories.size());
  for (std::size_t u = 0; u < episode.user_histories.size(); ++u) {
    std::vector<double> rewards;
    rewards.reserve(episode.user_histories[u].size());
    for (const auto& step : episode.user_histories[u]) rewards.push_back(step.reward);
    returns[u] = env::discounted_return(rewards, agent.config().gamma_user);
  }
  for (auto& event : episode.events) {
    const double q = returns[static_cast<std::size_t>(event.user_id)]
                            [static_cast<std::size_t>(event.step)];
    event.user_return = q;
    const double uplift = event.factual - event.counterfactual;
    metrics.event_user_return_sum += q;
    metrics.event_uplift_sum += uplift;
    ++metrics.event_count;
    const auto& snapshot = episode.steps[static_cast<std::size_t>(event.step)];
    const int provider_id = snapshot.groups[static_cast<std::size_t>(event.group_index)].provider_id;
    const auto& trajectory = episode.providers[static_cast<std::size_t>(provider_id)];
    const double satisfaction =
        event.step == 0 ? trajectory.initial_satisfaction
                        : trajectory.satisfaction[static_cast<std::size_t>(event.step - 1)];
    metrics.scatter.emplace_back(satisfaction, uplift);
  }
}

}  // namespace

RewardDecomposition decompose_provider_reward(const env::ProviderOutcome& outcome,
                                              const core::ProviderState& provider) {
  RewardDecomposition parts;
  const double p = outcome.feedback;
  if (p == 0.0) return parts;  // satisfaction unchanged, reward is exactly zero
  const double rec_component =
      provider.exposure_sensitivity * static_cast<double>(outcome.recommendation_count);
  const double feedback_component = provider.feedback_sensitivity * outcome.sum_reward;
  parts.rec_part = rec_component / p * outcome.reward;
  parts.feedback_part = feedback_component / p * outcome.reward;
  parts.drift_part = outcome.reward - parts.rec_part - parts.feedback_part;
  return parts;
}

RolloutResult run_eco_episode(const agent::EcoAgent& agent,
                              const core::EnvironmentConfig& config,
                              std::uint64_t env_seed, std::uint64_t action_seed,
                              const RolloutOptions& options) {
  env::Environment environment(config, env_seed);
  agent::EpisodeContext context(agent, environment);
  core::RngStream rng(action_seed, "rollout_act");
  RolloutResult out;
  init_group_slots(out.metrics, config);
  while (!environment.done()) {
    const std::vector<int> actions = context.act(environment.observation(), rng, options.greedy);
    const env::StepOutcome outcome = environment.step(actions);
    context.record_feedback(environment, outcome);
    accumulate_step(out.metrics, outcome, environment);
  }
  finish_episode(out.metrics, environment);
  if (options.keep_episode || options.collect_uplifts) {
    agent::EpisodeData episode = context.take();
    if (options.collect_uplifts) fill_uplift_metrics(agent, episode, out.metrics);
    if (options.keep_episode) out.episode = std::move(episode);
  }
  return out;
}

RolloutMetrics run_random_episode(const core::EnvironmentConfig& config,
                                  std::uint64_t env_seed, std::uint64_t action_seed) {
  env::Environment environment(config, env_seed);
  core::RngStream rng(action_seed, "rollout_act");
  RolloutMetrics metrics;
  init_group_slots(metrics, config);
  while (!environment.done()) {
    const std::vector<int> actions =
        agent::random_actions(environment.observation(), config.num_users, rng);
    const env::StepOutcome outcome = environment.step(actions);
    accumulate_step(metrics, outcome, environment);
  }
  finish_episode(metrics, environment);
  return metrics;
}

}  // namespace ecosim::harness
