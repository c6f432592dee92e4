#include "ecosim/agent/audit.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "ecosim/agent/eco_agent.hpp"
#include "ecosim/core/rng.hpp"
#include "ecosim/env/environment.hpp"
#include "ecosim/tensor/ops.hpp"

namespace ecosim::agent {

namespace {

env::ProviderStepRecord make_record(int m, double sum_reward,
                                    std::vector<double> bag, int inventory) {
  env::ProviderStepRecord r;
  r.recommendation_count = m;
  r.sum_reward = sum_reward;
  r.weighted_topic_bag = std::move(bag);
  r.inventory_size = inventory;
  return r;
}

}  // namespace

tensor::FdReport audit_gradients(std::uint64_t seed) {
  AgentConfig cfg;
  cfg.num_topics = 3;
  cfg.num_users = 2;
  cfg.inventory_normalizer = 10.0;
  cfg.lambda_weight = 0.6;
  cfg.hidden_dim = 6;
  cfg.head_dims = {5, 4};
  cfg.tower_dims = {6};
  cfg.learning_rate = 0.1;
  cfg.init_seed = seed;
  EcoAgent agent(cfg);

  // Two users, three steps, two providers; snapshots consistent with the
  // provider trajectories so the actor pass can rebuild its inputs.
  EpisodeData ep;
  ep.user_histories.resize(2);
  core::RngStream vals(seed, "fd_data");
  auto rnd = [&]() { return vals.next_double() - 0.5; };
  for (int u = 0; u < 2; ++u)
    for (int t = 0; t < 3; ++t)
      ep.user_histories[static_cast<std::size_t>(u)].push_back({(u + t) % 3, rnd()});

  for (int p = 0; p < 2; ++p) {
    ProviderTrajectory traj;
    traj.provider_id = p;
    for (int t = 0; t < 3; ++t) {
      if (t == 1) {
        traj.records.push_back(make_record(2, 0.6, {0.5, 0.5, 0.0}, 6));
        traj.recommendations.push_back({{0, 0, 0.4}, {1, 1, 0.2}});
      } else {
        traj.records.push_back(make_record(0, 0.0, {0.0, 0.0, 0.0}, 6));
        traj.recommendations.emplace_back();
      }
      traj.rewards.push_back(rnd());
      traj.satisfaction.push_back(0.0);
    }
    ep.providers.push_back(std::move(traj));
  }

  for (int t = 0; t < 3; ++t) {
    StepSnapshot snap;
    snap.step = t;
    snap.groups = {{0, 0, 2}, {0, 1, 1}, {1, 2, 3}};
    for (int g = 0; g < 3; ++g) {
      std::vector<double> ps(6);
      for (auto& v : ps) v = rnd();
      snap.group_provider_state.push_back(ps);
    }
    snap.user_states.resize(12);
    for (auto& v : snap.user_states) v = rnd();
    ep.steps.push_back(std::move(snap));

    for (int u = 0; u < 2; ++u) {
      RecommendationEvent ev;
      ev.user_id = u;
      ev.step = t;
      ev.doc_id = 0;
      ev.group_index = (u + t) % 3;
      ev.user_return = rnd();
      ev.factual = rnd();
      ev.counterfactual = rnd();
      ep.events.push_back(ev);
    }
  }
  std::vector<EpisodeData> batch;
  batch.push_back(std::move(ep));
  const auto& data = batch[0];

  auto loss_fn = [&]() {
    double total = 0.0;
    // User utility loss, averaged over predictions.
    std::size_t n_u = 0;
    double acc_u = 0.0;
    for (const auto& hist : data.user_histories) {
      std::vector<double> rewards;
      for (const auto& s : hist) rewards.push_back(s.reward);
      auto targets = env::discounted_return(rewards, cfg.gamma_user);
      for (std::size_t t = 0; t < hist.size(); ++t) {
        std::span<const env::UserHistoryStep> prefix(hist.data(), t);
        auto state = agent.encode_user(prefix);
        double pred = agent.predict_user_utility(state, hist[t].topic);
        acc_u += tensor::huber_loss(pred, targets[t], 1.0).loss;
        ++n_u;
      }
    }
    total += acc_u / static_cast<double>(n_u);
    // Provider utility loss.
    std::size_t n_p = 0;
    double acc_p = 0.0;
    for (const auto& traj : data.providers) {
      auto targets = env::discounted_return(traj.rewards, cfg.gamma_provider);
      for (std::size_t t = 0; t < traj.records.size(); ++t) {
        std::span<const env::ProviderStepRecord> prefix(traj.records.data(), t);
        auto state = agent.encode_provider(prefix);
        double pred = agent.predict_provider_utility(state, traj.records[t]);
        acc_p += tensor::huber_loss(pred, targets[t], 1.0).loss;
        ++n_p;
      }
    }
    total += acc_p / static_cast<double>(n_p);
    // Actor surrogate: -sum R log pi / N with R held fixed.
    double acc_a = 0.0;
    for (const auto& ev : data.events) {
      const auto& snap = data.steps[static_cast<std::size_t>(ev.step)];
      std::span<const double> row(
          snap.user_states.data() + static_cast<std::size_t>(ev.user_id) * 6, 6);
      std::vector<CandidateInput> cands;
      for (std::size_t g = 0; g < snap.groups.size(); ++g)
        cands.push_back({snap.groups[g].topic, snap.group_provider_state[g]});
      // Count-weighted group softmax.
      std::vector<double> phi_probs = agent.policy_distribution(row, cands);
      double z = 0.0;
      for (std::size_t g = 0; g < snap.groups.size(); ++g)
        z += snap.groups[g].count * phi_probs[g];
      double pi_doc = phi_probs[static_cast<std::size_t>(ev.group_index)] / z;
      double reward = (1.0 - cfg.lambda_weight) * ev.user_return +
                      cfg.lambda_weight * (ev.factual - ev.counterfactual);
      acc_a += -reward * std::log(pi_doc);
    }
    total += acc_a / static_cast<double>(data.events.size());
    return total;
  };
  auto grad_fn = [&]() {
    agent.params().zero_grads();
    agent.user_utility_gradient(batch);
    agent.provider_utility_gradient(batch);
    UpdateStats stats;
    agent.actor_gradient(batch, stats);
  };
  tensor::FdOptions options;
  // Central-difference noise is ~1e-11 here; the floor keeps structurally
  // zero gradient entries from comparing that noise against 1e-8.
  options.denom_floor = 1e-6;
  return tensor::finite_difference_check(agent.params(), loss_fn, grad_fn, options);
}

}  // namespace ecosim::agent
