#include "ecosim/harness/probes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ecosim/core/config.hpp"
#include "ecosim/core/types.hpp"
#include "ecosim/env/environment.hpp"

namespace ecosim::harness {

namespace {

// Every stochastic knob is pinned: point-mass scalar draws, zero quality
// noise, zero creation rate. The rollout is then a pure function of the
// action sequence, so branch differences isolate the recommendation itself.
core::EnvironmentConfig probe_config() {
  core::EnvironmentConfig config;
  config.num_topics = 2;
  config.num_users = 1;
  config.num_providers = 2;
  config.initial_docs_per_provider = 1;
  config.horizon = 8;
  config.gamma_user = 0.95;
  config.gamma_provider = 0.95;
  config.master_seed = 77;
  config.user_params.quality_sensitivity = core::ScalarDist(0.3);
  config.user_params.preference_drift = core::ScalarDist(0.2);

  core::ProviderGroupConfig group;
  group.name = "providers";
  group.size = 2;
  group.no_rec_drift = core::ScalarDist(-0.2);
  group.exposure_sensitivity = core::ScalarDist(0.4);
  group.feedback_sensitivity = core::ScalarDist(0.3);
  group.preference_drift = core::ScalarDist(0.05);
  group.creation_rate = core::ScalarDist(0.0);
  group.quality_mean = core::ScalarDist(0.5);
  group.quality_std = core::ScalarDist(0.0);
  group.viability_threshold = core::ScalarDist(-100.0);
  group.satisfaction_kind = core::SatisfactionFn::Kind::Linear;
  group.satisfaction_param = core::ScalarDist(0.5);
  group.offset_x0 = core::ScalarDist(1.0);
  config.provider_groups.push_back(group);
  return config;
}

// Discounted return of each provider's reward series from step 0. The first
// action is `first_action` (a document id or kNoRecommendation); every later
// step recommends nothing.
std::array<double, 2> branch_returns(const core::EnvironmentConfig& config,
                                     int first_action) {
  env::Environment environment(config, 4242);
  std::array<std::vector<double>, 2> rewards;
  int action = first_action;
  while (!environment.done()) {
    auto outcome = environment.step({action});
    for (const auto& provider : outcome.providers)
      rewards[static_cast<std::size_t>(provider.provider_id)].push_back(provider.reward);
    action = env::Environment::kNoRecommendation;
  }
  std::array<double, 2> q{};
  for (std::size_t p = 0; p < 2; ++p)
    q[p] = env::discounted_return(rewards[p], config.gamma_provider)[0];
  return q;
}

}  // namespace

AdditivityReport uplift_additivity_probe() {
  auto config = probe_config();
  env::Environment initial(config, 4242);
  // One document per provider; map each provider to its document id.
  std::array<int, 2> doc_of{};
  for (const auto& candidate : initial.observation().candidates)
    doc_of[static_cast<std::size_t>(candidate.provider_id)] = candidate.doc_id;

  const auto base = branch_returns(config, env::Environment::kNoRecommendation);
  AdditivityReport report;
  report.min_uplift_magnitude = std::numeric_limits<double>::infinity();
  for (int rec = 0; rec < 2; ++rec) {
    const auto branch = branch_returns(config, doc_of[static_cast<std::size_t>(rec)]);
    double delta_sum = 0.0;
    for (std::size_t p = 0; p < 2; ++p) {
      const double delta = branch[p] - base[p];
      delta_sum += delta;
      if (static_cast<int>(p) == rec) {
        report.min_uplift_magnitude =
            std::min(report.min_uplift_magnitude, std::abs(delta));
      } else {
        report.max_cross_effect = std::max(report.max_cross_effect, std::abs(delta));
      }
    }
    const double rec_delta = branch[static_cast<std::size_t>(rec)] -
                             base[static_cast<std::size_t>(rec)];
    report.max_additivity_error =
        std::max(report.max_additivity_error, std::abs(delta_sum - rec_delta));
  }
  return report;
}

}  // namespace ecosim::harness
