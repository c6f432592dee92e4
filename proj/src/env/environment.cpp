#include "ecosim/env/environment.hpp"

#include <algorithm>
#include <cmath>

#include "ecosim/core/errors.hpp"
#include "ecosim/core/sampling.hpp"

namespace ecosim::env {

namespace {

// Satisfaction values are snapped to this grid. Differences and short sums
// of grid numbers are exact in double precision while |S| < 2^22, which makes
// the telescoping identity sum_t r^c_t = S_T - S_0 hold bitwise.
constexpr double kSatisfactionGrid = 1073741824.0;  // 2^30

double quantize_satisfaction(double s) {
  return std::round(s * kSatisfactionGrid) / kSatisfactionGrid;
}

constexpr double kTopicEpsilon = 1e-6;

}  // namespace

double user_reward(const core::UserState& user, const core::Document& doc) {
  double relevance = user.preference.values[static_cast<std::size_t>(doc.topic)];
  return (1.0 - user.quality_sensitivity) * relevance +
         user.quality_sensitivity * doc.quality;
}

core::UserState update_user(const core::UserState& user,
                            const core::Document& doc, double r_u) {
  core::UserState next = user;
  next.preference.values[static_cast<std::size_t>(doc.topic)] +=
      user.preference_drift * r_u;
  if (!next.preference.normalize()) next.preference = user.preference;
  return next;
}

double provider_feedback(const core::ProviderState& provider, int m,
                         double sum_user_reward) {
  if (m < 0) throw UsageError("provider_feedback: negative recommendation count");
  return provider.no_rec_drift + provider.exposure_sensitivity * m +
         provider.feedback_sensitivity * sum_user_reward;
}

std::vector<double> provider_topic_distribution(const core::ProviderState& provider) {
  const auto& v = provider.preference.values;
  std::vector<double> p(v.size());
  double total = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    p[k] = std::max(v[k], 0.0) + kTopicEpsilon;
    total += p[k];
  }
  for (double& x : p) x /= total;
  return p;
}

ProviderUpdate update_provider(const core::ProviderState& provider,
                               std::span<const RecommendationInput> recs,
                               ProviderRng& rng, int first_doc_id,
                               int created_at) {
  if (!provider.viable)
    throw UsageError("update_provider: provider " + std::to_string(provider.id) +
                     " already left");
  ProviderUpdate out;
  out.provider = provider;
  core::ProviderState& next = out.provider;

  int m = static_cast<int>(recs.size());
  double sum_reward = 0.0;
  for (const auto& r : recs) sum_reward += r.user_reward;

  out.feedback = provider_feedback(provider, m, sum_reward);
  next.accumulated_feedback += out.feedback;
  double prev_satisfaction = provider.satisfaction;
  next.satisfaction = quantize_satisfaction(
      core::satisfaction_value(next.satisfaction_fn, next.accumulated_feedback));
  out.reward = next.satisfaction - prev_satisfaction;

  // Preference drifts toward rewarded topics (one-hot topics: component add).
  for (const auto& r : recs)
    next.preference.values[static_cast<std::size_t>(r.topic)] +=
        next.preference_drift * r.user_reward;
  if (!next.preference.normalize()) next.preference = provider.preference;

  if (out.reward > 0.0 && next.creation_rate > 0.0) {
    int n_new = static_cast<int>(std::llround(next.creation_rate * out.reward));
    if (n_new > 0) {
      std::vector<double> topic_probs = provider_topic_distribution(next);
      for (int j = 0; j < n_new; ++j) {
        core::Document doc;
        doc.id = first_doc_id + j;
        doc.topic = rng.topic.sample_categorical(topic_probs);
        doc.quality = core::sample_truncated_normal(
            rng.quality, next.quality_mean, next.quality_std, -1.0, 1.0);
        doc.provider_id = next.id;
        doc.created_at = created_at;
        next.documents.push_back(doc.id);
        out.new_documents.push_back(std::move(doc));
      }
    }
  }

  out.left = next.satisfaction < next.viability_threshold;
  if (out.left) next.viable = false;
  return out;
}

std::vector<double> discounted_return(std::span<const double> rewards,
                                      double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw UsageError("discounted_return: gamma outside [0,1]");
  std::vector<double> q(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    q[i] = acc;
  }
  return q;
}

Environment::Environment(core::EnvironmentConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
  config_.validate();
  const int k = config_.num_topics;

  users_.reserve(static_cast<std::size_t>(config_.num_users));
  for (int u = 0; u < config_.num_users; ++u) {
    core::UserState user;
    user.id = u;
    core::RngStream pref_rng(seed_, "user_pref", static_cast<std::uint64_t>(u));
    user.preference = core::sample_unit_preference(pref_rng, k);
    core::RngStream param_rng(seed_, "user_param", static_cast<std::uint64_t>(u));
    user.quality_sensitivity = config_.user_params.quality_sensitivity.sample(param_rng);
    user.preference_drift = config_.user_params.preference_drift.sample(param_rng);
    users_.push_back(std::move(user));
  }
  user_histories_.resize(users_.size());

  int provider_id = 0;
  for (std::size_t gi = 0; gi < config_.provider_groups.size(); ++gi) {
    const auto& g = config_.provider_groups[gi];
    for (int j = 0; j < g.size; ++j, ++provider_id) {
      core::ProviderState p;
      p.id = provider_id;
      p.group = static_cast<int>(gi);
      core::RngStream pref_rng(seed_, "provider_pref",
                               static_cast<std::uint64_t>(provider_id));
      p.preference = core::sample_unit_preference(pref_rng, k);
      core::RngStream param_rng(seed_, "provider_param",
                                static_cast<std::uint64_t>(provider_id));
      p.no_rec_drift = g.no_rec_drift.sample(param_rng);
      p.exposure_sensitivity = g.exposure_sensitivity.sample(param_rng);
      p.feedback_sensitivity = g.feedback_sensitivity.sample(param_rng);
      p.preference_drift = g.preference_drift.sample(param_rng);
      p.creation_rate = g.creation_rate.sample(param_rng);
      p.quality_mean = g.quality_mean.sample(param_rng);
      p.quality_std = g.quality_std.sample(param_rng);
      p.viability_threshold = g.viability_threshold.sample(param_rng);
      p.satisfaction_fn.kind = g.satisfaction_kind;
      p.satisfaction_fn.param = g.satisfaction_param.sample(param_rng);
      p.satisfaction_fn.offset_x0 = g.offset_x0.sample(param_rng);
      p.accumulated_feedback = 0.0;
      p.satisfaction =
          quantize_satisfaction(core::satisfaction_value(p.satisfaction_fn, 0.0));
      p.viable = true;
      providers_.push_back(std::move(p));
    }
  }
  provider_histories_.resize(providers_.size());

  for (auto& p : providers_) {
    std::vector<double> topic_probs = provider_topic_distribution(p);
    core::RngStream topic_rng(seed_, "init_doc_topic",
                              static_cast<std::uint64_t>(p.id));
    core::RngStream quality_rng(seed_, "init_doc_quality",
                                static_cast<std::uint64_t>(p.id));
    for (int j = 0; j < config_.initial_docs_per_provider; ++j) {
      core::Document doc;
      doc.id = next_doc_id_++;
      doc.topic = topic_rng.sample_categorical(topic_probs);
      doc.quality = core::sample_truncated_normal(quality_rng, p.quality_mean,
                                                  p.quality_std, -1.0, 1.0);
      doc.provider_id = p.id;
      doc.created_at = 0;
      p.documents.push_back(doc.id);
      documents_.push_back(std::move(doc));
    }
  }

  build_observation();
}

const core::Document& Environment::document(int id) const {
  if (id < 0 || id >= static_cast<int>(documents_.size()))
    throw UsageError("Environment::document: unknown id " + std::to_string(id));
  return documents_[static_cast<std::size_t>(id)];
}

const std::vector<ProviderStepRecord>& Environment::provider_history(
    int provider_id) const {
  if (provider_id < 0 || provider_id >= static_cast<int>(provider_histories_.size()))
    throw UsageError("Environment::provider_history: unknown provider");
  return provider_histories_[static_cast<std::size_t>(provider_id)];
}

int Environment::viable_provider_count() const {
  int n = 0;
  for (const auto& p : providers_)
    if (p.viable) ++n;
  return n;
}

StepOutcome Environment::step(const std::vector<int>& actions) {
  if (done_) throw UsageError("Environment::step: episode already done");
  if (static_cast<int>(actions.size()) != config_.num_users)
    throw UsageError("Environment::step: need one action per user");
  for (int a : actions) {
    if (a == kNoRecommendation) continue;
    if (a < 0 || a >= static_cast<int>(documents_.size()))
      throw InvalidActionError(
          "action references unknown document " + std::to_string(a), a);
    const auto& doc = documents_[static_cast<std::size_t>(a)];
    if (!providers_[static_cast<std::size_t>(doc.provider_id)].viable)
      throw InvalidActionError("action references document " + std::to_string(a) +
                                   " of a departed provider",
                               a);
  }

  StepOutcome outcome;
  outcome.step = step_;
  outcome.user_rewards.resize(actions.size(), 0.0);

  // Phase 1: all rewards against pre-step states (simultaneity).
  for (std::size_t u = 0; u < actions.size(); ++u) {
    if (actions[u] == kNoRecommendation) continue;
    outcome.user_rewards[u] =
        user_reward(users_[u], documents_[static_cast<std::size_t>(actions[u])]);
  }

  // Group recommendations by provider, in user-index order.
  std::vector<std::vector<RecommendationDetail>> per_provider(providers_.size());
  for (std::size_t u = 0; u < actions.size(); ++u) {
    if (actions[u] == kNoRecommendation) continue;
    const auto& doc = documents_[static_cast<std::size_t>(actions[u])];
    per_provider[static_cast<std::size_t>(doc.provider_id)].push_back(
        {doc.id, static_cast<int>(u), outcome.user_rewards[u]});
  }

  // Phase 2: user drift.
  for (std::size_t u = 0; u < actions.size(); ++u) {
    if (actions[u] == kNoRecommendation) continue;
    users_[u] = update_user(users_[u], documents_[static_cast<std::size_t>(actions[u])],
                            outcome.user_rewards[u]);
  }

  // Phase 3: provider dynamics, id order; every viable provider updates,
  // recommended or not.
  for (auto& provider : providers_) {
    if (!provider.viable) continue;
    const auto& details = per_provider[static_cast<std::size_t>(provider.id)];
    int inventory_before = static_cast<int>(provider.documents.size());

    std::vector<RecommendationInput> recs;
    recs.reserve(details.size());
    for (const auto& d : details)
      recs.push_back({documents_[static_cast<std::size_t>(d.doc_id)].topic,
                      d.user_reward});

    ProviderRng rng{
        core::RngStream(seed_, "doc_topic", static_cast<std::uint64_t>(provider.id),
                        static_cast<std::uint64_t>(step_)),
        core::RngStream(seed_, "doc_quality", static_cast<std::uint64_t>(provider.id),
                        static_cast<std::uint64_t>(step_))};
    ProviderUpdate update =
        update_provider(provider, recs, rng, next_doc_id_, step_ + 1);

    ProviderOutcome po;
    po.provider_id = provider.id;
    po.reward = update.reward;
    po.satisfaction = update.provider.satisfaction;
    po.feedback = update.feedback;
    po.recommendation_count = static_cast<int>(details.size());
    for (const auto& d : details) po.sum_reward += d.user_reward;
    po.left = update.left;
    po.recommendations = details;
    outcome.providers.push_back(std::move(po));

    // Visible history record for this step (kept even if the provider leaves
    // now; nothing is appended after departure).
    ProviderStepRecord record;
    record.recommendation_count = static_cast<int>(details.size());
    for (const auto& d : details) record.sum_reward += d.user_reward;
    record.weighted_topic_bag.assign(static_cast<std::size_t>(config_.num_topics), 0.0);
    if (!details.empty() && record.sum_reward != 0.0) {
      for (const auto& r : recs)
        record.weighted_topic_bag[static_cast<std::size_t>(r.topic)] +=
            r.user_reward / record.sum_reward;
    }
    record.inventory_size = inventory_before;
    provider_histories_[static_cast<std::size_t>(provider.id)].push_back(
        std::move(record));

    for (auto& doc : update.new_documents) {
      next_doc_id_++;
      outcome.new_documents.push_back(doc);
      documents_.push_back(std::move(doc));
    }
    if (update.left) outcome.providers_left.push_back(provider.id);
    provider = std::move(update.provider);
  }

  // Phase 4: user histories.
  for (std::size_t u = 0; u < actions.size(); ++u) {
    UserHistoryStep h;
    if (actions[u] != kNoRecommendation) {
      h.topic = documents_[static_cast<std::size_t>(actions[u])].topic;
      h.reward = outcome.user_rewards[u];
    }
    user_histories_[u].push_back(h);
  }

  ++step_;
  done_ = (step_ >= config_.horizon) || viable_provider_count() == 0;
  outcome.done = done_;
  build_observation();
  return outcome;
}

void Environment::build_observation() {
  observation_ = Observation{};
  observation_.step = step_;
  observation_.users.reserve(users_.size());
  for (std::size_t u = 0; u < users_.size(); ++u)
    observation_.users.push_back({static_cast<int>(u), user_histories_[u]});
  for (const auto& p : providers_) {
    if (!p.viable) continue;
    observation_.providers.push_back(
        {p.id, provider_histories_[static_cast<std::size_t>(p.id)]});
    for (int doc_id : p.documents) {
      const auto& doc = documents_[static_cast<std::size_t>(doc_id)];
      observation_.candidates.push_back({doc.id, doc.topic, doc.provider_id});
    }
  }
}

}  // namespace ecosim::env
