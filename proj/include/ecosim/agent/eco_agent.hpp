#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecosim/agent/features.hpp"
#include "ecosim/core/rng.hpp"
#include "ecosim/env/environment.hpp"
#include "ecosim/tensor/models.hpp"
#include "ecosim/tensor/params.hpp"
#include "ecosim/tensor/tape.hpp"

namespace ecosim::agent {

struct AgentConfig {
  int num_topics = 10;
  int num_users = 50;
  double inventory_normalizer = 200.0;
  double lambda_weight = 0.0;  // provider constant, in [0, 1]
  double temperature = 1.0;
  int hidden_dim = 32;
  std::vector<int> head_dims = {32, 32, 16};
  std::vector<int> tower_dims = {32, 32, 32};
  double gamma_user = 0.99;
  double gamma_provider = 0.99;
  double learning_rate = 0.05;
  bool constant_baseline = false;
  std::uint64_t init_seed = 0;

  void validate() const;
};

AgentConfig agent_config_for(const core::EnvironmentConfig& env_config,
                             double lambda_weight, double learning_rate,
                             std::uint64_t init_seed);

// One candidate as the policy sees it: content topic plus the hidden state of
// the provider that owns it.
struct CandidateInput {
  int topic = -1;
  std::span<const double> provider_state;
};

// Candidates sharing (provider, topic) are interchangeable to the policy, so
// acting scores each group once.
struct CandidateGroup {
  int provider_id = -1;
  int topic = -1;
  int count = 0;
};

// Everything the update needs to rebuild the policy inputs of one acted step.
struct StepSnapshot {
  int step = -1;
  std::vector<CandidateGroup> groups;
  std::vector<std::vector<double>> group_provider_state;
  std::vector<double> user_states;  // num_users x hidden_dim, row per user
};

struct RecommendationEvent {
  int user_id = -1;
  int step = -1;
  int doc_id = -1;
  int group_index = -1;
  double log_prob = 0.0;
  double reward = 0.0;       // realized r^u, filled after the env step
  double user_return = 0.0;  // discounted return, filled during the update
  double factual = 0.0;      // model estimates, filled during the update
  double counterfactual = 0.0;
  std::uint64_t actor_version = 0;
};

struct ProviderTrajectory {
  int provider_id = -1;
  double initial_satisfaction = 0.0;
  std::vector<env::ProviderStepRecord> records;
  std::vector<std::vector<RecommendationDetailFeature>> recommendations;
  std::vector<double> rewards;
  std::vector<double> satisfaction;  // at step end
};

struct EpisodeData {
  std::vector<StepSnapshot> steps;
  std::vector<RecommendationEvent> events;  // step-major, user-minor
  std::vector<std::vector<env::UserHistoryStep>> user_histories;
  std::vector<ProviderTrajectory> providers;
};

struct UpdateStats {
  double mean_user_return = 0.0;
  double mean_uplift = 0.0;
  double mean_objective = 0.0;
  double user_loss = 0.0;
  double provider_loss = 0.0;
  int num_events = 0;
};

class EcoAgent {
 public:
  explicit EcoAgent(const AgentConfig& config);

  const AgentConfig& config() const { return config_; }
  tensor::ParameterStore& params() { return store_; }
  const tensor::ParameterStore& params() const { return store_; }
  std::uint64_t actor_version() const { return actor_version_; }

  std::vector<double> encode_user(std::span<const env::UserHistoryStep> history) const;
  double predict_user_utility(std::span<const double> state, int topic) const;
  std::vector<double> encode_provider(
      std::span<const env::ProviderStepRecord> history) const;
  double predict_provider_utility(std::span<const double> state,
                                  const env::ProviderStepRecord& action) const;

  // Full softmax over the candidate set; empty input returns an empty vector
  // (an episode-end signal, not an error).
  std::vector<double> policy_distribution(
      std::span<const double> user_state,
      std::span<const CandidateInput> candidates) const;

  // Factual minus counterfactual provider utility estimate for the step's
  // recommendation of the given user, both from the model.
  double counterfactual_uplift(const ProviderTrajectory& trajectory, int step,
                               int user_id) const;

  // Fills factual/counterfactual estimates of every event from the current
  // provider utility model.
  void compute_event_uplifts(EpisodeData& episode) const;

  // One policy-gradient update from a batch of on-policy episodes: utility
  // models first, then uplifts, then the actor towers. Consumed episodes must
  // come from the current actor parameters. With utility_only the actor phase
  // is skipped, so only the utility losses move the parameters.
  UpdateStats reinforce_update(std::vector<EpisodeData>& episodes,
                               bool utility_only = false);

  // Gradient accumulators behind reinforce_update, exposed for gradient
  // verification. Each adds into the store's current gradients without
  // touching parameters. The actor pass reads user_return, factual, and
  // counterfactual from the events as fixed reward constants.
  double user_utility_gradient(const std::vector<EpisodeData>& episodes);
  double provider_utility_gradient(const std::vector<EpisodeData>& episodes);
  void actor_gradient(const std::vector<EpisodeData>& episodes, UpdateStats& stats);

  // Binary parameter dump plus a JSON sidecar describing the architecture.
  void save_checkpoint(const std::string& path) const;
  static EcoAgent load_checkpoint(const std::string& path);
  static EcoAgent load_checkpoint(const std::string& path, double expected_lambda);

 private:
  friend class EpisodeContext;

  void head_input_user(std::span<const double> state, int topic,
                       std::vector<double>& out) const;
  void head_input_provider(std::span<const double> state,
                           const env::ProviderStepRecord& action,
                           std::vector<double>& out) const;
  double run_head(const tensor::MlpParams& head, const std::vector<double>& input) const;

  AgentConfig config_;
  tensor::ParameterStore store_;
  tensor::GruParams user_gru_;
  tensor::GruParams provider_gru_;
  tensor::MlpParams user_head_;
  tensor::MlpParams provider_head_;
  tensor::MlpParams user_tower_;
  tensor::MlpParams cand_tower_;
  tensor::AdagradState optimizer_;
  std::uint64_t actor_version_ = 0;
};

// Incremental acting state for one environment rollout. Alternate act() and
// record_feedback() once per step, then take() the collected episode.
class EpisodeContext {
 public:
  EpisodeContext(const EcoAgent& agent, const env::Environment& environment);

  std::vector<int> act(const env::Observation& observation, core::RngStream& rng,
                       bool greedy = false);
  void record_feedback(const env::Environment& environment,
                       const env::StepOutcome& outcome);
  EpisodeData take();

 private:
  const EcoAgent* agent_;
  int num_users_;
  int num_topics_;
  int hidden_dim_;
  std::vector<std::vector<double>> user_hidden_;
  std::vector<std::vector<double>> provider_hidden_;
  std::vector<char> provider_alive_;
  std::vector<int> pending_topic_;
  bool awaiting_feedback_ = false;
  EpisodeData data_;

  tensor::GruWorkspace gru_ws_;
  std::vector<double> input_buf_;
  std::vector<double> hidden_buf_;
  std::vector<double> tower_in_;
  std::vector<double> tower_out_;
  std::vector<double> tower_scratch_;
  std::vector<double> scores_;
  std::vector<double> group_probs_;
};

}  // namespace ecosim::agent
