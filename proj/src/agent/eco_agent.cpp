#include "ecosim/agent/eco_agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "ecosim/core/errors.hpp"
#include "ecosim/tensor/checkpoint.hpp"
#include "ecosim/tensor/ops.hpp"

namespace ecosim::agent {

using ecosim::ConfigError;
using ecosim::UsageError;
using tensor::Activation;
using tensor::Tape;

void AgentConfig::validate() const {
  if (num_topics < 2) throw ConfigError("AgentConfig: num_topics must be >= 2");
  if (num_users < 1) throw ConfigError("AgentConfig: num_users must be >= 1");
  if (inventory_normalizer <= 0.0)
    throw ConfigError("AgentConfig: inventory_normalizer must be positive");
  if (lambda_weight < 0.0 || lambda_weight > 1.0)
    throw ConfigError("AgentConfig: lambda_weight must lie in [0, 1]");
  if (temperature <= 0.0) throw ConfigError("AgentConfig: temperature must be positive");
  if (hidden_dim < 1) throw ConfigError("AgentConfig: hidden_dim must be >= 1");
  if (head_dims.empty() || tower_dims.empty())
    throw ConfigError("AgentConfig: head_dims and tower_dims must be nonempty");
  for (int d : head_dims)
    if (d < 1) throw ConfigError("AgentConfig: head_dims entries must be >= 1");
  for (int d : tower_dims)
    if (d < 1) throw ConfigError("AgentConfig: tower_dims entries must be >= 1");
  if (gamma_user < 0.0 || gamma_user > 1.0 || gamma_provider < 0.0 || gamma_provider > 1.0)
    throw ConfigError("AgentConfig: discount factors must lie in [0, 1]");
  if (learning_rate <= 0.0) throw ConfigError("AgentConfig: learning_rate must be positive");
}

AgentConfig agent_config_for(const core::EnvironmentConfig& env_config,
                             double lambda_weight, double learning_rate,
                             std::uint64_t init_seed) {
  AgentConfig a;
  a.num_topics = env_config.num_topics;
  a.num_users = env_config.num_users;
  a.inventory_normalizer = static_cast<double>(env_config.num_providers) *
                           static_cast<double>(env_config.initial_docs_per_provider);
  a.lambda_weight = lambda_weight;
  a.gamma_user = env_config.gamma_user;
  a.gamma_provider = env_config.gamma_provider;
  a.learning_rate = learning_rate;
  a.init_seed = init_seed;
  return a;
}

namespace {

std::vector<int> with_input(int input_dim, const std::vector<int>& dims, int output_dim) {
  std::vector<int> full;
  full.reserve(dims.size() + 2);
  full.push_back(input_dim);
  full.insert(full.end(), dims.begin(), dims.end());
  if (output_dim > 0) full.push_back(output_dim);
  return full;
}

}  // namespace

EcoAgent::EcoAgent(const AgentConfig& config)
    : config_(config), optimizer_(config.learning_rate) {
  config_.validate();
  const int k = config_.num_topics;
  const int h = config_.hidden_dim;
  user_gru_ = tensor::make_gru(store_, "user_gru", k + 1, h);
  provider_gru_ = tensor::make_gru(store_, "provider_gru", k + 3, h);
  user_head_ = tensor::make_mlp(store_, "user_head", with_input(h + k, config_.head_dims, 1),
                                Activation::ReLU, Activation::Identity);
  provider_head_ =
      tensor::make_mlp(store_, "provider_head", with_input(h + k + 3, config_.head_dims, 1),
                       Activation::ReLU, Activation::Identity);
  user_tower_ = tensor::make_mlp(store_, "user_tower", with_input(h, config_.tower_dims, 0),
                                 Activation::ReLU, Activation::Identity);
  cand_tower_ = tensor::make_mlp(store_, "cand_tower", with_input(k + h, config_.tower_dims, 0),
                                 Activation::ReLU, Activation::Identity);
  store_.init_uniform(config_.init_seed);
}

std::vector<double> EcoAgent::encode_user(
    std::span<const env::UserHistoryStep> history) const {
  const int k = config_.num_topics;
  std::vector<double> h(static_cast<std::size_t>(config_.hidden_dim), 0.0);
  std::vector<double> x, next;
  tensor::GruWorkspace ws;
  for (const auto& step : history) {
    user_step_input(step, k, x);
    tensor::gru_forward(store_, user_gru_, x, h, ws, next);
    h.swap(next);
  }
  return h;
}

std::vector<double> EcoAgent::encode_provider(
    std::span<const env::ProviderStepRecord> history) const {
  const int k = config_.num_topics;
  std::vector<double> h(static_cast<std::size_t>(config_.hidden_dim), 0.0);
  std::vector<double> x, next;
  tensor::GruWorkspace ws;
  for (const auto& record : history) {
    provider_record_input(record, k, static_cast<double>(config_.num_users),
                          config_.inventory_normalizer, x);
    tensor::gru_forward(store_, provider_gru_, x, h, ws, next);
    h.swap(next);
  }
  return h;
}

void EcoAgent::head_input_user(std::span<const double> state, int topic,
                               std::vector<double>& out) const {
  const int k = config_.num_topics;
  if (static_cast<int>(state.size()) != config_.hidden_dim)
    throw ShapeError("predict_user_utility: state has wrong dimension");
  out.assign(state.begin(), state.end());
  out.resize(state.size() + static_cast<std::size_t>(k), 0.0);
  if (topic >= 0 && topic < k) out[state.size() + static_cast<std::size_t>(topic)] = 1.0;
}

void EcoAgent::head_input_provider(std::span<const double> state,
                                   const env::ProviderStepRecord& action,
                                   std::vector<double>& out) const {
  if (static_cast<int>(state.size()) != config_.hidden_dim)
    throw ShapeError("predict_provider_utility: state has wrong dimension");
  std::vector<double> feature;
  provider_record_input(action, config_.num_topics, static_cast<double>(config_.num_users),
                        config_.inventory_normalizer, feature);
  out.assign(state.begin(), state.end());
  out.insert(out.end(), feature.begin(), feature.end());
}

double EcoAgent::run_head(const tensor::MlpParams& head,
                          const std::vector<double>& input) const {
  std::vector<double> out, scratch;
  tensor::mlp_forward(store_, head, input, out, scratch);
  return out[0];
}

double EcoAgent::predict_user_utility(std::span<const double> state, int topic) const {
  std::vector<double> input;
  head_input_user(state, topic, input);
  return run_head(user_head_, input);
}

double EcoAgent::predict_provider_utility(std::span<const double> state,
                                          const env::ProviderStepRecord& action) const {
  std::vector<double> input;
  head_input_provider(state, action, input);
  return run_head(provider_head_, input);
}

std::vector<double> EcoAgent::policy_distribution(
    std::span<const double> user_state,
    std::span<const CandidateInput> candidates) const {
  if (candidates.empty()) return {};
  if (static_cast<int>(user_state.size()) != config_.hidden_dim)
    throw ShapeError("policy_distribution: user state has wrong dimension");
  const int k = config_.num_topics;
  std::vector<double> phi, psi, scratch;
  tensor::mlp_forward(store_, user_tower_, user_state, phi, scratch);
  std::vector<double> scores(candidates.size(), 0.0);
  std::vector<double> input;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    if (static_cast<int>(cand.provider_state.size()) != config_.hidden_dim)
      throw ShapeError("policy_distribution: provider state has wrong dimension");
    topic_one_hot(cand.topic, k, input);
    input.insert(input.end(), cand.provider_state.begin(), cand.provider_state.end());
    tensor::mlp_forward(store_, cand_tower_, input, psi, scratch);
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) s += phi[j] * psi[j];
    scores[i] = s;
  }
  return tensor::softmax(scores, config_.temperature);
}

double EcoAgent::counterfactual_uplift(const ProviderTrajectory& trajectory, int step,
                                       int user_id) const {
  if (step < 0 || step >= static_cast<int>(trajectory.records.size()))
    throw UsageError("counterfactual_uplift: step outside the trajectory");
  std::span<const env::ProviderStepRecord> records(trajectory.records);
  std::vector<double> state = encode_provider(records.subspan(0, static_cast<std::size_t>(step)));
  double factual = predict_provider_utility(state, trajectory.records[static_cast<std::size_t>(step)]);
  env::ProviderStepRecord removed = remove_recommendation(
      trajectory.records[static_cast<std::size_t>(step)],
      trajectory.recommendations[static_cast<std::size_t>(step)], user_id,
      config_.num_topics);
  return factual - predict_provider_utility(state, removed);
}

void EcoAgent::compute_event_uplifts(EpisodeData& episode) const {
  const int k = config_.num_topics;
  const int h = config_.hidden_dim;
  // Hidden states before each step, shared across this episode's events.
  std::vector<std::vector<std::vector<double>>> prefix_states(episode.providers.size());
  std::vector<double> x, next;
  tensor::GruWorkspace ws;
  for (std::size_t p = 0; p < episode.providers.size(); ++p) {
    const auto& traj = episode.providers[p];
    auto& states = prefix_states[p];
    states.resize(traj.records.size());
    std::vector<double> state(static_cast<std::size_t>(h), 0.0);
    for (std::size_t t = 0; t < traj.records.size(); ++t) {
      states[t] = state;
      provider_record_input(traj.records[t], k, static_cast<double>(config_.num_users),
                            config_.inventory_normalizer, x);
      tensor::gru_forward(store_, provider_gru_, x, state, ws, next);
      state.swap(next);
    }
  }

  // Snapshots are stored in step order; map a step index to its snapshot.
  std::size_t snap = 0;
  std::vector<double> head_in;
  for (auto& event : episode.events) {
    while (snap + 1 < episode.steps.size() && episode.steps[snap].step != event.step) ++snap;
    if (episode.steps[snap].step != event.step)
      throw UsageError("compute_event_uplifts: event without a step snapshot");
    const auto& group = episode.steps[snap].groups[static_cast<std::size_t>(event.group_index)];
    const auto& traj = episode.providers[static_cast<std::size_t>(group.provider_id)];
    const auto t = static_cast<std::size_t>(event.step);
    if (t >= traj.records.size())
      throw UsageError("compute_event_uplifts: provider trajectory shorter than event step");
    const auto& state = prefix_states[static_cast<std::size_t>(group.provider_id)][t];
    head_input_provider(state, traj.records[t], head_in);
    event.factual = run_head(provider_head_, head_in);
    env::ProviderStepRecord removed = remove_recommendation(
        traj.records[t], traj.recommendations[t], event.user_id, k);
    head_input_provider(state, removed, head_in);
    event.counterfactual = run_head(provider_head_, head_in);
  }
}

double EcoAgent::user_utility_gradient(const std::vector<EpisodeData>& episodes) {
  const int k = config_.num_topics;
  std::size_t n_pred = 0;
  for (const auto& ep : episodes)
    for (const auto& hist : ep.user_histories) n_pred += hist.size();
  if (n_pred == 0) return 0.0;

  Tape tape(&store_);
  std::vector<double> x, onehot, rewards;
  double total_loss = 0.0;
  for (const auto& ep : episodes) {
    for (const auto& hist : ep.user_histories) {
      if (hist.empty()) continue;
      rewards.clear();
      for (const auto& s : hist) rewards.push_back(s.reward);
      std::vector<double> targets = env::discounted_return(rewards, config_.gamma_user);

      tape.reset();
      int h = tape.zeros(config_.hidden_dim);
      for (std::size_t t = 0; t < hist.size(); ++t) {
        topic_one_hot(hist[t].topic, k, onehot);
        int action = tape.input(onehot);
        int pred = tape_mlp(tape, user_head_, tape.concat(h, action));
        tensor::HuberResult hub =
            tensor::huber_loss(tape.value(pred)[0], targets[t], 1.0);
        total_loss += hub.loss;
        tape.seed_gradient(pred, 0, hub.dpred / static_cast<double>(n_pred));
        user_step_input(hist[t], k, x);
        h = tape_gru_step(tape, user_gru_, tape.input(x), h);
      }
      tape.backward();
    }
  }
  return total_loss / static_cast<double>(n_pred);
}

double EcoAgent::provider_utility_gradient(const std::vector<EpisodeData>& episodes) {
  const int k = config_.num_topics;
  std::size_t n_pred = 0;
  for (const auto& ep : episodes)
    for (const auto& traj : ep.providers) n_pred += traj.records.size();
  if (n_pred == 0) return 0.0;

  Tape tape(&store_);
  std::vector<double> x;
  double total_loss = 0.0;
  for (const auto& ep : episodes) {
    for (const auto& traj : ep.providers) {
      if (traj.records.empty()) continue;
      std::vector<double> targets =
          env::discounted_return(traj.rewards, config_.gamma_provider);

      tape.reset();
      int h = tape.zeros(config_.hidden_dim);
      for (std::size_t t = 0; t < traj.records.size(); ++t) {
        provider_record_input(traj.records[t], k, static_cast<double>(config_.num_users),
                              config_.inventory_normalizer, x);
        int feature = tape.input(x);
        int pred = tape_mlp(tape, provider_head_, tape.concat(h, feature));
        tensor::HuberResult hub =
            tensor::huber_loss(tape.value(pred)[0], targets[t], 1.0);
        total_loss += hub.loss;
        tape.seed_gradient(pred, 0, hub.dpred / static_cast<double>(n_pred));
        h = tape_gru_step(tape, provider_gru_, feature, h);
      }
      tape.backward();
    }
  }
  return total_loss / static_cast<double>(n_pred);
}

void EcoAgent::actor_gradient(const std::vector<EpisodeData>& episodes, UpdateStats& stats) {
  const int k = config_.num_topics;
  const double lambda = config_.lambda_weight;
  const double temp = config_.temperature;

  std::size_t n_events = 0;
  double sum_return = 0.0, sum_uplift = 0.0;
  for (const auto& ep : episodes) {
    n_events += ep.events.size();
    for (const auto& ev : ep.events) {
      sum_return += ev.user_return;
      sum_uplift += ev.factual - ev.counterfactual;
    }
  }
  stats.num_events = static_cast<int>(n_events);
  if (n_events == 0) return;
  stats.mean_user_return = sum_return / static_cast<double>(n_events);
  stats.mean_uplift = sum_uplift / static_cast<double>(n_events);
  stats.mean_objective =
      (1.0 - lambda) * stats.mean_user_return + lambda * stats.mean_uplift;
  const double baseline = config_.constant_baseline ? stats.mean_objective : 0.0;

  Tape tape(&store_);
  std::vector<double> psi_in, probs, seeds;
  std::vector<int> psi_nodes;
  for (const auto& ep : episodes) {
    std::size_t next_event = 0;
    for (const auto& snap : ep.steps) {
      std::size_t first = next_event;
      while (next_event < ep.events.size() &&
             ep.events[next_event].step == snap.step)
        ++next_event;
      if (next_event == first) continue;

      tape.reset();
      const std::size_t n_groups = snap.groups.size();
      psi_nodes.clear();
      for (std::size_t g = 0; g < n_groups; ++g) {
        topic_one_hot(snap.groups[g].topic, k, psi_in);
        psi_in.insert(psi_in.end(), snap.group_provider_state[g].begin(),
                      snap.group_provider_state[g].end());
        psi_nodes.push_back(tape_mlp(tape, cand_tower_, tape.input(psi_in)));
      }

      const std::size_t hd = static_cast<std::size_t>(config_.hidden_dim);
      for (std::size_t i = first; i < next_event; ++i) {
        const auto& ev = ep.events[i];
        std::span<const double> row(
            snap.user_states.data() + static_cast<std::size_t>(ev.user_id) * hd, hd);
        int phi = tape_mlp(tape, user_tower_, tape.input(row));
        int dots = tape.dots(phi, psi_nodes);

        // Count-weighted softmax over group scores <phi, psi_g>/T.
        std::span<const double> raw = tape.value(dots);
        probs.assign(n_groups, 0.0);
        double max_s = -std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < n_groups; ++g)
          max_s = std::max(max_s, raw[g] / temp);
        double z = 0.0;
        for (std::size_t g = 0; g < n_groups; ++g) {
          probs[g] = static_cast<double>(snap.groups[g].count) *
                     std::exp(raw[g] / temp - max_s);
          z += probs[g];
        }
        const double reward = (1.0 - lambda) * ev.user_return +
                              lambda * (ev.factual - ev.counterfactual) - baseline;
        const double scale = -reward / (static_cast<double>(n_events) * temp);
        seeds.assign(n_groups, 0.0);
        for (std::size_t g = 0; g < n_groups; ++g) {
          double indicator = (static_cast<int>(g) == ev.group_index) ? 1.0 : 0.0;
          seeds[g] = scale * (indicator - probs[g] / z);
        }
        tape.seed_gradient(dots, seeds);
      }
      tape.backward();
    }
  }
}

UpdateStats EcoAgent::reinforce_update(std::vector<EpisodeData>& episodes,
                                       bool utility_only) {
  for (const auto& ep : episodes)
    for (const auto& ev : ep.events)
      if (ev.actor_version != actor_version_)
        throw UsageError("reinforce_update: events predate the current actor parameters");

  // Realized discounted user returns.
  std::vector<double> rewards;
  for (auto& ep : episodes) {
    std::vector<std::vector<double>> returns(ep.user_histories.size());
    for (std::size_t u = 0; u < ep.user_histories.size(); ++u) {
      const auto& hist = ep.user_histories[u];
      if (hist.empty()) continue;
      rewards.clear();
      for (const auto& s : hist) rewards.push_back(s.reward);
      returns[u] = env::discounted_return(rewards, config_.gamma_user);
    }
    for (auto& ev : ep.events)
      ev.user_return = returns[static_cast<std::size_t>(ev.user_id)]
                              [static_cast<std::size_t>(ev.step)];
  }

  UpdateStats stats;
  store_.zero_grads();
  stats.user_loss = user_utility_gradient(episodes);
  tensor::adagrad_step(optimizer_, store_);

  store_.zero_grads();
  stats.provider_loss = provider_utility_gradient(episodes);
  tensor::adagrad_step(optimizer_, store_);

  if (utility_only) {
    double return_sum = 0.0;
    for (const auto& ep : episodes) {
      for (const auto& ev : ep.events) {
        return_sum += ev.user_return;
        ++stats.num_events;
      }
    }
    if (stats.num_events > 0) stats.mean_user_return = return_sum / stats.num_events;
    ++actor_version_;
    return stats;
  }

  // Uplifts come from the freshly updated provider utility model.
  for (auto& ep : episodes) compute_event_uplifts(ep);

  store_.zero_grads();
  actor_gradient(episodes, stats);
  tensor::adagrad_step(optimizer_, store_);
  ++actor_version_;
  return stats;
}

void EcoAgent::save_checkpoint(const std::string& path) const {
  tensor::save_parameters(store_, path);
  nlohmann::json j;
  j["lambda"] = config_.lambda_weight;
  j["temperature"] = config_.temperature;
  j["hidden_dim"] = config_.hidden_dim;
  j["head_dims"] = config_.head_dims;
  j["tower_dims"] = config_.tower_dims;
  j["num_topics"] = config_.num_topics;
  j["num_users"] = config_.num_users;
  j["inventory_normalizer"] = config_.inventory_normalizer;
  j["gamma_user"] = config_.gamma_user;
  j["gamma_provider"] = config_.gamma_provider;
  j["learning_rate"] = config_.learning_rate;
  j["constant_baseline"] = config_.constant_baseline;
  j["init_seed"] = config_.init_seed;
  std::ofstream out(path + ".json", std::ios::binary);
  if (!out) throw ConfigError("save_checkpoint: cannot write " + path + ".json");
  out << j.dump(2) << '\n';
}

EcoAgent EcoAgent::load_checkpoint(const std::string& path) {
  std::ifstream in(path + ".json", std::ios::binary);
  if (!in) throw ConfigError("load_checkpoint: cannot read " + path + ".json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("load_checkpoint: bad sidecar: ") + e.what());
  }
  AgentConfig config;
  try {
    config.lambda_weight = j.at("lambda").get<double>();
    config.temperature = j.at("temperature").get<double>();
    config.hidden_dim = j.at("hidden_dim").get<int>();
    config.head_dims = j.at("head_dims").get<std::vector<int>>();
    config.tower_dims = j.at("tower_dims").get<std::vector<int>>();
    config.num_topics = j.at("num_topics").get<int>();
    config.num_users = j.at("num_users").get<int>();
    config.inventory_normalizer = j.at("inventory_normalizer").get<double>();
    config.gamma_user = j.at("gamma_user").get<double>();
    config.gamma_provider = j.at("gamma_provider").get<double>();
    config.learning_rate = j.at("learning_rate").get<double>();
    config.constant_baseline = j.at("constant_baseline").get<bool>();
    config.init_seed = j.at("init_seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("load_checkpoint: bad sidecar: ") + e.what());
  }
  EcoAgent agent(config);
  tensor::load_parameters(agent.store_, path);
  return agent;
}

EcoAgent EcoAgent::load_checkpoint(const std::string& path, double expected_lambda) {
  EcoAgent agent = load_checkpoint(path);
  if (std::abs(agent.config().lambda_weight - expected_lambda) > 1e-12)
    throw ConfigError("load_checkpoint: checkpoint lambda does not match the requested value");
  return agent;
}

EpisodeContext::EpisodeContext(const EcoAgent& agent, const env::Environment& environment)
    : agent_(&agent) {
  const auto& ec = environment.config();
  const auto& ac = agent.config();
  if (ec.num_topics != ac.num_topics || ec.num_users != ac.num_users)
    throw UsageError("EpisodeContext: agent and environment configurations disagree");
  num_users_ = ec.num_users;
  num_topics_ = ec.num_topics;
  hidden_dim_ = ac.hidden_dim;
  user_hidden_.assign(static_cast<std::size_t>(num_users_),
                      std::vector<double>(static_cast<std::size_t>(hidden_dim_), 0.0));
  const auto num_providers = static_cast<std::size_t>(ec.num_providers);
  provider_hidden_.assign(num_providers,
                          std::vector<double>(static_cast<std::size_t>(hidden_dim_), 0.0));
  provider_alive_.assign(num_providers, 1);
  pending_topic_.assign(static_cast<std::size_t>(num_users_), -1);
  data_.user_histories.resize(static_cast<std::size_t>(num_users_));
  data_.providers.resize(num_providers);
  for (std::size_t p = 0; p < num_providers; ++p) {
    data_.providers[p].provider_id = static_cast<int>(p);
    data_.providers[p].initial_satisfaction = environment.providers()[p].satisfaction;
    provider_alive_[p] = environment.providers()[p].viable ? 1 : 0;
  }
}

std::vector<int> EpisodeContext::act(const env::Observation& observation,
                                     core::RngStream& rng, bool greedy) {
  if (awaiting_feedback_)
    throw UsageError("EpisodeContext::act: feedback of the previous step not recorded");
  std::vector<int> actions(static_cast<std::size_t>(num_users_),
                           env::Environment::kNoRecommendation);
  std::fill(pending_topic_.begin(), pending_topic_.end(), -1);
  if (observation.candidates.empty()) return actions;  // episode end

  // Group candidates by (provider, topic) in first-occurrence order.
  struct LocalGroup {
    int provider_id, topic;
    std::vector<int> docs;
  };
  std::vector<LocalGroup> groups;
  std::unordered_map<long long, std::size_t> index;
  index.reserve(observation.candidates.size());
  for (const auto& cand : observation.candidates) {
    long long key = static_cast<long long>(cand.provider_id) *
                        static_cast<long long>(num_topics_) +
                    cand.topic;
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back({cand.provider_id, cand.topic, {}});
    groups[it->second].docs.push_back(cand.doc_id);
  }

  StepSnapshot snap;
  snap.step = observation.step;
  snap.groups.reserve(groups.size());
  snap.group_provider_state.reserve(groups.size());
  const auto hd = static_cast<std::size_t>(hidden_dim_);
  snap.user_states.resize(static_cast<std::size_t>(num_users_) * hd);
  for (int u = 0; u < num_users_; ++u)
    std::copy(user_hidden_[static_cast<std::size_t>(u)].begin(),
              user_hidden_[static_cast<std::size_t>(u)].end(),
              snap.user_states.begin() + static_cast<std::size_t>(u) * hd);

  // One candidate-tower evaluation per group.
  const auto& store = agent_->store_;
  std::vector<std::vector<double>> psis(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    snap.groups.push_back({grp.provider_id, grp.topic, static_cast<int>(grp.docs.size())});
    snap.group_provider_state.push_back(
        provider_hidden_[static_cast<std::size_t>(grp.provider_id)]);
    topic_one_hot(grp.topic, num_topics_, tower_in_);
    const auto& pstate = provider_hidden_[static_cast<std::size_t>(grp.provider_id)];
    tower_in_.insert(tower_in_.end(), pstate.begin(), pstate.end());
    tensor::mlp_forward(store, agent_->cand_tower_, tower_in_, psis[g], tower_scratch_);
  }

  const double temp = agent_->config_.temperature;
  scores_.assign(groups.size(), 0.0);
  group_probs_.assign(groups.size(), 0.0);
  for (int u = 0; u < num_users_; ++u) {
    tensor::mlp_forward(store, agent_->user_tower_, user_hidden_[static_cast<std::size_t>(u)],
                        tower_out_, tower_scratch_);
    double max_s = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double s = 0.0;
      for (std::size_t j = 0; j < tower_out_.size(); ++j) s += tower_out_[j] * psis[g][j];
      scores_[g] = s / temp;
      max_s = std::max(max_s, scores_[g]);
    }
    double z = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      group_probs_[g] =
          static_cast<double>(groups[g].docs.size()) * std::exp(scores_[g] - max_s);
      z += group_probs_[g];
    }
    const double log_z = max_s + std::log(z);

    std::size_t pick = 0;
    int doc;
    if (greedy) {
      for (std::size_t g = 1; g < groups.size(); ++g)
        if (scores_[g] > scores_[pick]) pick = g;
      doc = groups[pick].docs[0];
    } else {
      double r = rng.next_double() * z;
      double cum = 0.0;
      pick = groups.size() - 1;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        cum += group_probs_[g];
        if (r < cum) {
          pick = g;
          break;
        }
      }
      doc = groups[pick].docs[rng.next_below(groups[pick].docs.size())];
    }

    actions[static_cast<std::size_t>(u)] = doc;
    pending_topic_[static_cast<std::size_t>(u)] = groups[pick].topic;
    RecommendationEvent ev;
    ev.user_id = u;
    ev.step = observation.step;
    ev.doc_id = doc;
    ev.group_index = static_cast<int>(pick);
    ev.log_prob = scores_[pick] - log_z;
    ev.actor_version = agent_->actor_version();
    data_.events.push_back(ev);
  }
  data_.steps.push_back(std::move(snap));
  awaiting_feedback_ = true;
  return actions;
}

void EpisodeContext::record_feedback(const env::Environment& environment,
                                     const env::StepOutcome& outcome) {
  if (!awaiting_feedback_)
    throw UsageError("EpisodeContext::record_feedback: no pending step");
  const auto& store = agent_->store_;
  for (int u = 0; u < num_users_; ++u) {
    const auto su = static_cast<std::size_t>(u);
    const double reward = outcome.user_rewards[su];
    auto& ev = data_.events[data_.events.size() - static_cast<std::size_t>(num_users_) + su];
    ev.reward = reward;
    env::UserHistoryStep step{pending_topic_[su], reward};
    data_.user_histories[su].push_back(step);
    user_step_input(step, num_topics_, input_buf_);
    tensor::gru_forward(store, agent_->user_gru_, input_buf_, user_hidden_[su], gru_ws_,
                        hidden_buf_);
    user_hidden_[su].swap(hidden_buf_);
  }
  for (const auto& po : outcome.providers) {
    const auto pid = static_cast<std::size_t>(po.provider_id);
    auto& traj = data_.providers[pid];
    const auto& record = environment.provider_history(po.provider_id).back();
    traj.records.push_back(record);
    std::vector<RecommendationDetailFeature> details;
    details.reserve(po.recommendations.size());
    for (const auto& rd : po.recommendations)
      details.push_back({rd.user_id, environment.document(rd.doc_id).topic, rd.user_reward});
    traj.recommendations.push_back(std::move(details));
    traj.rewards.push_back(po.reward);
    traj.satisfaction.push_back(po.satisfaction);
    if (po.left) {
      provider_alive_[pid] = 0;
    } else {
      provider_record_input(record, num_topics_, static_cast<double>(num_users_),
                            agent_->config_.inventory_normalizer, input_buf_);
      tensor::gru_forward(store, agent_->provider_gru_, input_buf_, provider_hidden_[pid],
                          gru_ws_, hidden_buf_);
      provider_hidden_[pid].swap(hidden_buf_);
    }
  }
  awaiting_feedback_ = false;
}

EpisodeData EpisodeContext::take() {
  if (awaiting_feedback_)
    throw UsageError("EpisodeContext::take: feedback of the last step not recorded");
  return std::move(data_);
}

}  // namespace ecosim::agent
