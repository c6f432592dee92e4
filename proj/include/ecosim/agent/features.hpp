#pragma once

#include <span>
#include <vector>

#include "ecosim/env/environment.hpp"

namespace ecosim::agent {

// One recommendation a provider received in a step, as the agent sees it.
struct RecommendationDetailFeature {
  int user_id = -1;
  int topic = -1;
  double reward = 0.0;
};

// Recurrent input for one user step: topic one-hot ++ realized reward.
// A step without a recommendation (topic -1) contributes an all-zero one-hot.
void user_step_input(const env::UserHistoryStep& step, int num_topics,
                     std::vector<double>& out);

// Recurrent input for one provider step: exposure count, summed user reward,
// reward-weighted topic bag, inventory size. Counts are normalized so the
// scale stays comparable across population sizes.
void provider_record_input(const env::ProviderStepRecord& record, int num_topics,
                           double user_normalizer, double inventory_normalizer,
                           std::vector<double>& out);

// Topic one-hot; topic -1 yields the zero vector.
void topic_one_hot(int topic, int num_topics, std::vector<double>& out);

// The counterfactual step feature with one user's recommendation removed.
// The weighted topic bag is rebuilt from the remaining recommendations and is
// the zero vector when none remain or their rewards sum to zero.
env::ProviderStepRecord remove_recommendation(
    const env::ProviderStepRecord& record,
    std::span<const RecommendationDetailFeature> recommendations, int user_id,
    int num_topics);

}  // namespace ecosim::agent
