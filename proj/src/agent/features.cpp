#include "ecosim/agent/features.hpp"

#include "ecosim/core/errors.hpp"

namespace ecosim::agent {

void topic_one_hot(int topic, int num_topics, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(num_topics), 0.0);
  if (topic >= 0 && topic < num_topics) out[static_cast<std::size_t>(topic)] = 1.0;
}

void user_step_input(const env::UserHistoryStep& step, int num_topics,
                     std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(num_topics) + 1, 0.0);
  if (step.topic >= 0 && step.topic < num_topics)
    out[static_cast<std::size_t>(step.topic)] = 1.0;
  out[static_cast<std::size_t>(num_topics)] = step.reward;
}

void provider_record_input(const env::ProviderStepRecord& record, int num_topics,
                           double user_normalizer, double inventory_normalizer,
                           std::vector<double>& out) {
  if (user_normalizer <= 0.0 || inventory_normalizer <= 0.0)
    throw UsageError("provider_record_input: normalizers must be positive");
  out.assign(static_cast<std::size_t>(num_topics) + 3, 0.0);
  out[0] = static_cast<double>(record.recommendation_count) / user_normalizer;
  out[1] = record.sum_reward / user_normalizer;
  for (int k = 0; k < num_topics; ++k)
    out[static_cast<std::size_t>(2 + k)] =
        record.weighted_topic_bag[static_cast<std::size_t>(k)];
  out[static_cast<std::size_t>(num_topics) + 2] =
      static_cast<double>(record.inventory_size) / inventory_normalizer;
}

env::ProviderStepRecord remove_recommendation(
    const env::ProviderStepRecord& record,
    std::span<const RecommendationDetailFeature> recommendations, int user_id,
    int num_topics) {
  int removed = -1;
  for (std::size_t i = 0; i < recommendations.size(); ++i)
    if (recommendations[i].user_id == user_id) {
      removed = static_cast<int>(i);
      break;
    }
  if (removed < 0)
    throw UsageError("remove_recommendation: user not among the step's recommendations");

  env::ProviderStepRecord out;
  out.inventory_size = record.inventory_size;
  out.recommendation_count = record.recommendation_count - 1;
  out.sum_reward = record.sum_reward - recommendations[static_cast<std::size_t>(removed)].reward;
  out.weighted_topic_bag.assign(static_cast<std::size_t>(num_topics), 0.0);
  if (out.recommendation_count <= 0) {
    out.recommendation_count = 0;
    out.sum_reward = 0.0;
    return out;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < recommendations.size(); ++i) {
    if (static_cast<int>(i) == removed) continue;
    sum += recommendations[i].reward;
  }
  if (sum != 0.0) {
    for (std::size_t i = 0; i < recommendations.size(); ++i) {
      if (static_cast<int>(i) == removed) continue;
      const auto& rec = recommendations[i];
      if (rec.topic >= 0 && rec.topic < num_topics)
        out.weighted_topic_bag[static_cast<std::size_t>(rec.topic)] += rec.reward / sum;
    }
  }
  return out;
}

}  // namespace ecosim::agent
