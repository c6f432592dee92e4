#include "ecosim/harness/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include <nlohmann/json.hpp>

#include "ecosim/core/errors.hpp"
#include "ecosim/core/rng.hpp"
#include "ecosim/harness/parallel.hpp"

namespace ecosim::harness {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0) {
  return core::RngStream(seed, tag, a, b).next_u64();
}

MetricStat scaled(const MetricStat& stat, double factor) {
  return MetricStat{stat.mean * factor, stat.se * factor};
}

}  // namespace

TrainResult train_agent(agent::EcoAgent& agent, const Scenario& scenario,
                        const TrainOptions& options, std::uint64_t seed) {
  if (options.epochs < 0) throw UsageError("train_agent: epochs must be >= 0");
  if (options.envs_per_epoch < 1) {
    throw UsageError("train_agent: envs_per_epoch must be >= 1");
  }
  TrainResult result;
  double best_signal = 0.0;
  int best_epoch = -1;
  const int envs = options.envs_per_epoch;
  const int warmup = std::min(options.warmup_epochs, options.epochs / 3);
  const double lambda = agent.config().lambda_weight;
  const auto users = static_cast<double>(scenario.config.num_users);
  double providers = 0.0;
  for (const auto& group : scenario.config.provider_groups) providers += group.size;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<agent::EpisodeData> episodes(static_cast<std::size_t>(envs));
    std::vector<RolloutMetrics> metrics(static_cast<std::size_t>(envs));
    RolloutOptions rollout;
    rollout.keep_episode = true;
    parallel_for(envs, options.threads, [&](int i) {
      const auto e = static_cast<std::uint64_t>(epoch);
      const auto k = static_cast<std::uint64_t>(i);
      RolloutResult rolled =
          run_eco_episode(agent, scenario.config, derive_seed(seed, "train_env", e, k),
                          derive_seed(seed, "train_act", e, k), rollout);
      episodes[static_cast<std::size_t>(i)] = std::move(rolled.episode);
      metrics[static_cast<std::size_t>(i)] = std::move(rolled.metrics);
    });
    const agent::UpdateStats stats = agent.reinforce_update(episodes, epoch < warmup);
    EpochStats row;
    row.epoch = epoch;
    row.objective = stats.mean_objective;
    row.user_return = stats.mean_user_return;
    row.uplift = stats.mean_uplift;
    row.user_loss = stats.user_loss;
    row.provider_loss = stats.provider_loss;
    for (const auto& m : metrics) {
      row.user_reward_sum += m.user_reward_sum;
      row.provider_reward_sum += m.provider_reward_sum;
    }
    row.user_reward_sum /= static_cast<double>(envs);
    row.provider_reward_sum /= static_cast<double>(envs);
    result.curve.push_back(row);
    result.epochs_run = epoch + 1;
    if (options.log_progress) {
      std::fprintf(stderr,
                   "epoch %4d  objective %+.5f  user %+.5f  uplift %+.5f  "
                   "loss %.5f/%.5f\n",
                   epoch, row.objective, row.user_return, row.uplift, row.user_loss,
                   row.provider_loss);
    }
    if (!agent.params().all_finite() || !std::isfinite(stats.mean_objective)) {
      result.diverged = true;
      result.diagnostic =
          "training diverged at epoch " + std::to_string(epoch) + " (non-finite parameters)";
      break;
    }
    // Plateau detection tracks the realized per-capita return mix, not the
    // REINFORCE objective; the model's own uplift estimate is not comparable
    // across epochs while the utility towers are still moving. The clock
    // starts once warmup ends and the policy begins to move.
    if (epoch < warmup) continue;
    const double signal = (1.0 - lambda) * row.user_reward_sum / users +
                          lambda * row.provider_reward_sum / providers;
    if (best_epoch < 0 || signal > best_signal) {
      best_signal = signal;
      best_epoch = epoch;
    } else if (options.plateau_epochs > 0 && epoch - best_epoch >= options.plateau_epochs) {
      break;
    }
  }
  return result;
}

namespace {

EvalSummary summarize(std::vector<RolloutMetrics>& episodes,
                      const core::EnvironmentConfig& config) {
  EvalSummary summary;
  const auto n = episodes.size();
  summary.n = static_cast<int>(n);
  if (n == 0) return summary;

  std::vector<double> values(n);
  const auto stat_of = [&](auto&& field) {
    for (std::size_t i = 0; i < n; ++i) values[i] = field(episodes[i]);
    return mean_se(values);
  };
  summary.user_reward_sum = stat_of([](const RolloutMetrics& m) { return m.user_reward_sum; });
  summary.provider_reward_sum =
      stat_of([](const RolloutMetrics& m) { return m.provider_reward_sum; });
  summary.user_reward_per_user =
      scaled(summary.user_reward_sum, 1.0 / static_cast<double>(config.num_users));
  summary.provider_reward_per_provider =
      scaled(summary.provider_reward_sum, 1.0 / static_cast<double>(config.num_providers));
  summary.viable_end =
      stat_of([](const RolloutMetrics& m) { return static_cast<double>(m.viable_end); });
  summary.drift_part = stat_of([](const RolloutMetrics& m) { return m.drift_part; });
  summary.rec_part = stat_of([](const RolloutMetrics& m) { return m.rec_part; });
  summary.feedback_part = stat_of([](const RolloutMetrics& m) { return m.feedback_part; });

  for (std::size_t g = 0; g < config.provider_groups.size(); ++g) {
    GroupStat group;
    group.group = config.provider_groups[g].name;
    group.recommendations =
        stat_of([g](const RolloutMetrics& m) { return m.group_recommendations[g]; });
    group.viable_end = stat_of([g](const RolloutMetrics& m) { return m.group_viable_end[g]; });
    summary.groups.push_back(std::move(group));
  }

  // Episodes that end early (every provider gone) hold their final count for
  // the remaining steps.
  summary.viable_series.assign(static_cast<std::size_t>(config.horizon), 0.0);
  for (const auto& m : episodes) {
    for (std::size_t t = 0; t < summary.viable_series.size(); ++t) {
      const double v = t < m.viable_series.size()
                           ? static_cast<double>(m.viable_series[t])
                           : static_cast<double>(m.viable_series.back());
      summary.viable_series[t] += v;
    }
  }
  for (double& v : summary.viable_series) v /= static_cast<double>(n);

  double return_sum = 0.0;
  double uplift_sum = 0.0;
  long long events = 0;
  for (auto& m : episodes) {
    return_sum += m.event_user_return_sum;
    uplift_sum += m.event_uplift_sum;
    events += m.event_count;
    summary.scatter.insert(summary.scatter.end(), m.scatter.begin(), m.scatter.end());
  }
  if (events > 0) {
    summary.mean_event_user_return = return_sum / static_cast<double>(events);
    summary.mean_event_uplift = uplift_sum / static_cast<double>(events);
  }
  return summary;
}

}  // namespace

EvalSummary evaluate_agent(const agent::EcoAgent& agent, const Scenario& scenario,
                           const EvalOptions& options, std::uint64_t seed) {
  if (options.n_rollouts < 1) throw UsageError("evaluate_agent: n_rollouts must be >= 1");
  std::vector<RolloutMetrics> episodes(static_cast<std::size_t>(options.n_rollouts));
  RolloutOptions rollout;
  rollout.greedy = options.greedy;
  rollout.collect_uplifts = options.collect_uplifts;
  parallel_for(options.n_rollouts, options.threads, [&](int i) {
    const auto k = static_cast<std::uint64_t>(i);
    RolloutResult rolled =
        run_eco_episode(agent, scenario.config, derive_seed(seed, "eval_env", k),
                        derive_seed(seed, "eval_act", k), rollout);
    episodes[static_cast<std::size_t>(i)] = std::move(rolled.metrics);
  });
  return summarize(episodes, scenario.config);
}

EvalSummary evaluate_random(const Scenario& scenario, const EvalOptions& options,
                            std::uint64_t seed) {
  if (options.n_rollouts < 1) throw UsageError("evaluate_random: n_rollouts must be >= 1");
  std::vector<RolloutMetrics> episodes(static_cast<std::size_t>(options.n_rollouts));
  parallel_for(options.n_rollouts, options.threads, [&](int i) {
    const auto k = static_cast<std::uint64_t>(i);
    episodes[static_cast<std::size_t>(i)] =
        run_random_episode(scenario.config, derive_seed(seed, "eval_env", k),
                           derive_seed(seed, "eval_act", k));
  });
  return summarize(episodes, scenario.config);
}

CorrelationResult uplift_satisfaction_correlation(
    std::span<const std::pair<double, double>> scatter) {
  CorrelationResult result;
  result.n = scatter.size();
  std::vector<double> satisfaction(scatter.size());
  std::vector<double> uplift(scatter.size());
  for (std::size_t i = 0; i < scatter.size(); ++i) {
    satisfaction[i] = scatter[i].first;
    uplift[i] = scatter[i].second;
  }
  result.pearson = pearson(satisfaction, uplift);
  result.spearman = spearman(satisfaction, uplift);
  return result;
}

SweepResult lambda_sweep(const Scenario& scenario, const SweepOptions& options,
                         std::uint64_t seed) {
  if (options.lambdas.empty() || options.learning_rates.empty()) {
    throw UsageError("lambda_sweep: lambda and learning-rate grids must be nonempty");
  }
  SweepResult result;
  result.scenario = scenario.name;
  result.lambdas = options.lambdas;
  const std::uint64_t eval_seed = derive_seed(seed, "sweep_eval");
  EvalOptions cell_eval = options.eval;
  cell_eval.collect_uplifts = true;

  for (std::size_t li = 0; li < options.lambdas.size(); ++li) {
    const double lambda = options.lambdas[li];
    for (std::size_t ri = 0; ri < options.learning_rates.size(); ++ri) {
      const double lr = options.learning_rates[ri];
      if (options.train.log_progress) {
        std::fprintf(stderr, "[sweep] lambda=%g lr=%g\n", lambda, lr);
      }
      SweepCell cell;
      cell.lambda = lambda;
      cell.learning_rate = lr;
      agent::AgentConfig cell_config = agent::agent_config_for(
          scenario.config, lambda, lr, derive_seed(seed, "sweep_agent", li, ri));
      cell_config.constant_baseline = options.constant_baseline;
      agent::EcoAgent trained(cell_config);
      const TrainResult training =
          train_agent(trained, scenario, options.train, derive_seed(seed, "sweep_train", li, ri));
      cell.diverged = training.diverged;
      cell.epochs_run = training.epochs_run;
      if (!training.diverged) {
        cell.eval = evaluate_agent(trained, scenario, cell_eval, eval_seed);
        cell.objective = (1.0 - lambda) * cell.eval.user_reward_per_user.mean +
                         lambda * cell.eval.provider_reward_per_provider.mean;
      }
      result.cells.push_back(std::move(cell));
    }
    // Best learning rate for this lambda; diverged cells lose to any healthy
    // one, a fully diverged row falls back to its first cell.
    const std::size_t row_start = li * options.learning_rates.size();
    std::size_t best = row_start;
    bool found = false;
    for (std::size_t ri = 0; ri < options.learning_rates.size(); ++ri) {
      const SweepCell& cell = result.cells[row_start + ri];
      if (cell.diverged) continue;
      if (!found || cell.objective > result.cells[best].objective) {
        best = row_start + ri;
        found = true;
      }
    }
    result.cells[best].selected = true;
    result.selected.push_back(best);
  }

  for (auto& cell : result.cells) {
    if (!cell.selected) {
      cell.eval.scatter.clear();
      cell.eval.scatter.shrink_to_fit();
    }
  }
  result.random_baseline = evaluate_random(scenario, options.eval, eval_seed);
  return result;
}

namespace {

nlohmann::json stat_to_json(const MetricStat& stat) {
  return nlohmann::json{{"mean", stat.mean}, {"se", stat.se}};
}

MetricStat stat_from_json(const nlohmann::json& j) {
  return MetricStat{j.at("mean").get<double>(), j.at("se").get<double>()};
}

nlohmann::json eval_to_json(const EvalSummary& summary) {
  nlohmann::json j;
  j["n"] = summary.n;
  j["user_reward_sum"] = stat_to_json(summary.user_reward_sum);
  j["user_reward_per_user"] = stat_to_json(summary.user_reward_per_user);
  j["provider_reward_sum"] = stat_to_json(summary.provider_reward_sum);
  j["provider_reward_per_provider"] = stat_to_json(summary.provider_reward_per_provider);
  j["viable_end"] = stat_to_json(summary.viable_end);
  j["drift_part"] = stat_to_json(summary.drift_part);
  j["rec_part"] = stat_to_json(summary.rec_part);
  j["feedback_part"] = stat_to_json(summary.feedback_part);
  j["groups"] = nlohmann::json::array();
  for (const auto& group : summary.groups) {
    j["groups"].push_back({{"group", group.group},
                           {"recommendations", stat_to_json(group.recommendations)},
                           {"viable_end", stat_to_json(group.viable_end)}});
  }
  j["viable_series"] = summary.viable_series;
  j["mean_event_user_return"] = summary.mean_event_user_return;
  j["mean_event_uplift"] = summary.mean_event_uplift;
  nlohmann::json scatter = nlohmann::json::array();
  for (const auto& [satisfaction, uplift] : summary.scatter) {
    scatter.push_back({satisfaction, uplift});
  }
  j["scatter"] = std::move(scatter);
  return j;
}

EvalSummary eval_from_json(const nlohmann::json& j) {
  EvalSummary summary;
  summary.n = j.at("n").get<int>();
  summary.user_reward_sum = stat_from_json(j.at("user_reward_sum"));
  summary.user_reward_per_user = stat_from_json(j.at("user_reward_per_user"));
  summary.provider_reward_sum = stat_from_json(j.at("provider_reward_sum"));
  summary.provider_reward_per_provider = stat_from_json(j.at("provider_reward_per_provider"));
  summary.viable_end = stat_from_json(j.at("viable_end"));
  summary.drift_part = stat_from_json(j.at("drift_part"));
  summary.rec_part = stat_from_json(j.at("rec_part"));
  summary.feedback_part = stat_from_json(j.at("feedback_part"));
  for (const auto& g : j.at("groups")) {
    GroupStat group;
    group.group = g.at("group").get<std::string>();
    group.recommendations = stat_from_json(g.at("recommendations"));
    group.viable_end = stat_from_json(g.at("viable_end"));
    summary.groups.push_back(std::move(group));
  }
  summary.viable_series = j.at("viable_series").get<std::vector<double>>();
  summary.mean_event_user_return = j.at("mean_event_user_return").get<double>();
  summary.mean_event_uplift = j.at("mean_event_uplift").get<double>();
  for (const auto& pair : j.at("scatter")) {
    summary.scatter.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  return summary;
}

}  // namespace

std::string sweep_result_to_json(const SweepResult& result) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["scenario"] = result.scenario;
  j["lambdas"] = result.lambdas;
  j["cells"] = nlohmann::json::array();
  for (const auto& cell : result.cells) {
    j["cells"].push_back({{"lambda", cell.lambda},
                          {"learning_rate", cell.learning_rate},
                          {"objective", cell.objective},
                          {"diverged", cell.diverged},
                          {"selected", cell.selected},
                          {"epochs_run", cell.epochs_run},
                          {"eval", eval_to_json(cell.eval)}});
  }
  j["selected"] = result.selected;
  j["random_baseline"] = eval_to_json(result.random_baseline);
  return j.dump(1);
}

SweepResult sweep_result_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("sweep result JSON: ") + err.what());
  }
  SweepResult result;
  result.scenario = j.at("scenario").get<std::string>();
  result.lambdas = j.at("lambdas").get<std::vector<double>>();
  for (const auto& c : j.at("cells")) {
    SweepCell cell;
    cell.lambda = c.at("lambda").get<double>();
    cell.learning_rate = c.at("learning_rate").get<double>();
    cell.objective = c.at("objective").get<double>();
    cell.diverged = c.at("diverged").get<bool>();
    cell.selected = c.at("selected").get<bool>();
    cell.epochs_run = c.at("epochs_run").get<int>();
    cell.eval = eval_from_json(c.at("eval"));
    result.cells.push_back(std::move(cell));
  }
  result.selected = j.at("selected").get<std::vector<std::size_t>>();
  result.random_baseline = eval_from_json(j.at("random_baseline"));
  return result;
}

}  // namespace ecosim::harness
