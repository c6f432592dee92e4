#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecosim/core/config.hpp"
#include "ecosim/core/rng.hpp"
#include "ecosim/core/types.hpp"

namespace ecosim::env {

/// One recommendable document as exposed to agents (quality stays hidden).
struct Candidate {
  int doc_id = 0;
  int topic = 0;
  int provider_id = 0;
};

/// One entry of a user's visible interaction history. topic = -1 records a
/// step where the user received no recommendation.
struct UserHistoryStep {
  int topic = -1;
  double reward = 0.0;
};

/// One entry of a provider's visible history: exposure and feedback received
/// during a past step. weighted_topic_bag = sum_i r_i * v_di / sum_i r_i,
/// zero when m = 0 or the rewards sum to exactly zero.
struct ProviderStepRecord {
  int recommendation_count = 0;
  double sum_reward = 0.0;
  std::vector<double> weighted_topic_bag;
  int inventory_size = 0;
};

struct UserObservation {
  int id = 0;
  std::vector<UserHistoryStep> history;
};

struct ProviderObservation {
  int id = 0;
  std::vector<ProviderStepRecord> history;
};

/// Agent-visible view. Latent preferences, qualities, and satisfactions never
/// appear here; departed providers are absent entirely.
struct Observation {
  int step = 0;
  std::vector<UserObservation> users;
  std::vector<ProviderObservation> providers;
  std::vector<Candidate> candidates;  // ordered by (provider_id, doc_id)
};

struct RecommendationDetail {
  int doc_id = 0;
  int user_id = 0;
  double user_reward = 0.0;
};

struct ProviderOutcome {
  int provider_id = 0;
  double reward = 0.0;        // r^c_t = S_t - S_{t-1}
  double satisfaction = 0.0;  // S_t, after this step
  double feedback = 0.0;      // p^c_t
  int recommendation_count = 0;
  double sum_reward = 0.0;
  bool left = false;
  std::vector<RecommendationDetail> recommendations;
};

struct StepOutcome {
  int step = 0;  // index of the step that was just executed, 0-based
  std::vector<double> user_rewards;
  std::vector<ProviderOutcome> providers;  // providers viable at step start
  std::vector<int> providers_left;
  std::vector<core::Document> new_documents;
  bool done = false;
};

// Pure dynamics operations (the environment composes these; tests hit them
// directly).

/// r^u = (1 - eta^u) <v_d, v_u> + eta^u q_d; one-hot topic makes the inner
/// product a single preference component.
double user_reward(const core::UserState& user, const core::Document& doc);

/// v_u <- v_u + delta^u r^u v_d, renormalized to unit length. A degenerate
/// zero update keeps the previous preference. Sensitivities unchanged.
core::UserState update_user(const core::UserState& user,
                            const core::Document& doc, double r_u);

/// p^c_t = mu^c + eta^c1 m + eta^c2 sum_reward.
double provider_feedback(const core::ProviderState& provider, int m,
                         double sum_user_reward);

/// Creation distribution over topics: positive preference components,
/// epsilon-smoothed; all-negative preferences fall back to uniform.
std::vector<double> provider_topic_distribution(const core::ProviderState& provider);

struct RecommendationInput {
  int topic = 0;
  double user_reward = 0.0;
};

struct ProviderRng {
  core::RngStream topic;
  core::RngStream quality;
};

struct ProviderUpdate {
  core::ProviderState provider;
  double reward = 0.0;    // r^c_t
  double feedback = 0.0;  // p^c_t
  std::vector<core::Document> new_documents;
  bool left = false;
};

/// Applies one step of provider dynamics: feedback accumulation, satisfaction
/// and reward, preference drift toward rewarded topics, content creation
/// (round(kappa * r^c) documents when r^c > 0), and the churn check.
/// New documents get ids first_doc_id, first_doc_id+1, ...
/// Satisfaction values are snapped to a fixed 2^-30 grid so that reward sums
/// telescope exactly in double arithmetic; the deviation from the analytic
/// f(x) is below 5e-10.
ProviderUpdate update_provider(const core::ProviderState& provider,
                               std::span<const RecommendationInput> recs,
                               ProviderRng& rng, int first_doc_id,
                               int created_at);

/// Q_t = r_t + gamma Q_{t+1}, truncated at the sequence end.
std::vector<double> discounted_return(std::span<const double> rewards,
                                      double gamma);

/// Episodic engine. Construction is reset: it validates the config, draws all
/// initial states from streams keyed by (seed, purpose, entity), and builds
/// the first observation. One instance is single-owner; distinct instances
/// share nothing.
class Environment {
 public:
  /// Action value for "recommend nothing to this user" (used by
  /// counterfactual probes; the user sees topic -1, reward 0).
  static constexpr int kNoRecommendation = -1;

  Environment(core::EnvironmentConfig config, std::uint64_t seed);

  const Observation& observation() const { return observation_; }

  /// Executes one simultaneous step; actions[i] is the document recommended
  /// to user i (or kNoRecommendation). All user rewards are computed against
  /// pre-step states before any update applies.
  StepOutcome step(const std::vector<int>& actions);

  bool done() const { return done_; }
  int current_step() const { return step_; }
  int viable_provider_count() const;

  const core::EnvironmentConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  // Ground-truth inspection for metrics and logging; agents must not read
  // these (the Observation is their interface).
  const std::vector<core::UserState>& users() const { return users_; }
  const std::vector<core::ProviderState>& providers() const { return providers_; }
  const core::Document& document(int id) const;
  /// Full per-provider history including steps of providers that later left
  /// (observations only carry viable providers).
  const std::vector<ProviderStepRecord>& provider_history(int provider_id) const;

 private:
  void build_observation();

  core::EnvironmentConfig config_;
  std::uint64_t seed_ = 0;
  int step_ = 0;
  bool done_ = false;
  int next_doc_id_ = 0;
  std::vector<core::UserState> users_;
  std::vector<core::ProviderState> providers_;
  std::vector<core::Document> documents_;  // indexed by id, never removed
  std::vector<std::vector<UserHistoryStep>> user_histories_;
  std::vector<std::vector<ProviderStepRecord>> provider_histories_;
  Observation observation_;
};

}  // namespace ecosim::env
