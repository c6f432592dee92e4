#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecosim/agent/random_agent.hpp"
#include "ecosim/core/errors.hpp"
#include "ecosim/harness/experiment.hpp"
#include "ecosim/harness/parallel.hpp"
#include "ecosim/harness/report.hpp"
#include "ecosim/harness/rollout.hpp"
#include "ecosim/harness/scenarios.hpp"
#include "ecosim/harness/stats.hpp"

using namespace ecosim;
using namespace ecosim::core;
using namespace ecosim::harness;

namespace {

// Small environment with real churn pressure, sized so that training-path
// tests stay fast.
Scenario tiny_scenario() {
  Scenario scenario;
  scenario.family = ScenarioFamily::SaturatedLog;
  scenario.name = "tiny";
  EnvironmentConfig& c = scenario.config;
  c.num_topics = 4;
  c.num_users = 6;
  c.num_providers = 3;
  c.initial_docs_per_provider = 3;
  c.horizon = 6;
  c.user_params.quality_sensitivity = ScalarDist(0.1, 0.5);
  c.user_params.preference_drift = ScalarDist(0.05, 0.3);
  ProviderGroupConfig g;
  g.name = "providers";
  g.size = 3;
  g.no_rec_drift = ScalarDist(-0.5);
  g.exposure_sensitivity = ScalarDist(0.15);
  g.feedback_sensitivity = ScalarDist(0.2);
  g.preference_drift = ScalarDist(0.05);
  g.creation_rate = ScalarDist(1.0);
  g.quality_mean = ScalarDist(-0.2, 0.2);
  g.quality_std = ScalarDist(0.2);
  g.satisfaction_kind = SatisfactionFn::Kind::SaturatedLog;
  g.satisfaction_param = ScalarDist(1.5);
  g.offset_x0 = ScalarDist(2.0, 6.0);
  g.viability_threshold = ScalarDist(0.8);
  c.provider_groups.push_back(g);
  return scenario;
}

agent::AgentConfig tiny_agent_config(const Scenario& scenario, double lambda,
                                     double lr, std::uint64_t seed) {
  agent::AgentConfig cfg = agent::agent_config_for(scenario.config, lambda, lr, seed);
  cfg.hidden_dim = 8;
  cfg.head_dims = {8, 6};
  cfg.tower_dims = {8, 8};
  return cfg;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ecosim_harness_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Two-lambda synthetic sweep with enough structure to light up every report
// column.
SweepResult synthetic_sweep() {
  SweepResult result;
  result.scenario = "synthetic";
  result.lambdas = {0.0, 1.0};
  for (int i = 0; i < 2; ++i) {
    SweepCell cell;
    cell.lambda = result.lambdas[static_cast<std::size_t>(i)];
    cell.learning_rate = 0.1;
    cell.objective = 1.25 - i;
    cell.selected = true;
    cell.epochs_run = 7 + i;
    cell.eval.n = 3;
    cell.eval.user_reward_sum = {100.0 + i, 2.0};
    cell.eval.user_reward_per_user = {10.0 + i, 0.2};
    cell.eval.provider_reward_sum = {-4.0 + 2.0 * i, 0.5};
    cell.eval.provider_reward_per_provider = {-1.0 + 0.5 * i, 0.125};
    cell.eval.viable_end = {7.0 + i, 0.25};
    cell.eval.drift_part = {-6.0, 0.1};
    cell.eval.rec_part = {1.5 + i, 0.1};
    cell.eval.feedback_part = {0.5 + 0.123456789123 * i, 0.1};
    cell.eval.groups.push_back({"A", {30.0 + i, 1.0}, {3.0, 0.5}});
    cell.eval.groups.push_back({"B", {50.0 - i, 1.0}, {4.0 + i, 0.5}});
    cell.eval.viable_series = {8.0, 7.5, 7.0 + i};
    cell.eval.mean_event_user_return = 0.5;
    cell.eval.mean_event_uplift = 0.01 * (1 + i);
    cell.eval.scatter = {{2.0, 0.05 - 0.01 * i}, {3.0, 0.02}, {4.5, -0.01}};
    result.cells.push_back(std::move(cell));
    result.selected.push_back(static_cast<std::size_t>(i));
  }
  result.random_baseline.n = 3;
  result.random_baseline.user_reward_sum = {20.0, 3.0};
  result.random_baseline.user_reward_per_user = {2.0, 0.3};
  result.random_baseline.provider_reward_sum = {-9.0, 0.75};
  result.random_baseline.provider_reward_per_provider = {-3.0, 0.25};
  result.random_baseline.viable_end = {5.0, 0.5};
  result.random_baseline.groups.push_back({"A", {40.0, 1.5}, {2.0, 0.25}});
  result.random_baseline.groups.push_back({"B", {40.0, 1.5}, {3.0, 0.25}});
  result.random_baseline.viable_series = {8.0, 6.0, 5.0};
  return result;
}

}  // namespace

TEST_CASE("mean_se handles degenerate and simple samples") {
  CHECK(mean_se({}).mean == 0.0);
  CHECK(mean_se({}).se == 0.0);

  // n = 1: the standard error is reported as the 0 marker.
  const std::vector<double> one = {4.2};
  CHECK(mean_se(one).mean == 4.2);
  CHECK(mean_se(one).se == 0.0);

  const std::vector<double> pair = {1.0, 3.0};
  const MetricStat stat = mean_se(pair);
  CHECK(stat.mean == doctest::Approx(2.0));
  // sample variance 2, se = sqrt(2 / 2) = 1
  CHECK(stat.se == doctest::Approx(1.0));
}

TEST_CASE("correlations match hand-computed values and degenerate markers") {
  // Perfect anticorrelation: satisfaction (1,2,3) against uplift (-1,-2,-3).
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {-1.0, -2.0, -3.0};
  CHECK(pearson(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(spearman(x, y) == doctest::Approx(-1.0).epsilon(1e-12));

  // Monotone nonlinear relation: Spearman 1, Pearson below 1.
  const std::vector<double> ex = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> ey = {std::exp(1.0), std::exp(2.0), std::exp(3.0), std::exp(4.0)};
  CHECK(spearman(ex, ey) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(ex, ey) < 1.0);

  const std::vector<double> constant = {2.0, 2.0, 2.0};
  CHECK(std::isnan(pearson(x, constant)));
  CHECK(std::isnan(spearman(constant, y)));
  const std::vector<double> single = {1.0};
  CHECK(std::isnan(pearson(single, single)));

  const std::vector<double> ranks = average_ranks(std::vector<double>{10.0, 5.0, 5.0, 1.0});
  CHECK(ranks == std::vector<double>{4.0, 2.5, 2.5, 1.0});

  std::vector<std::pair<double, double>> pairs = {{1.0, -1.0}, {2.0, -2.0}, {3.0, -3.0}};
  const CorrelationResult corr = uplift_satisfaction_correlation(pairs);
  CHECK(corr.n == 3);
  CHECK(corr.pearson == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(corr.spearman == doctest::Approx(-1.0).epsilon(1e-12));
  pairs.resize(1);
  CHECK(std::isnan(uplift_satisfaction_correlation(pairs).pearson));
}

TEST_CASE("format_number uses 9 significant digits and plain decimal points") {
  CHECK(format_number(0.2) == "0.2");
  CHECK(format_number(-3.0) == "-3");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(1234567891.0) == "1.23456789e+09");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("decompose_provider_reward splits proportionally and sums exactly") {
  ProviderState provider;
  provider.no_rec_drift = -0.5;
  provider.exposure_sensitivity = 0.2;
  provider.feedback_sensitivity = 0.3;

  env::ProviderOutcome outcome;
  outcome.recommendation_count = 2;  // eta1 * m = 0.4
  outcome.sum_reward = 1.0;          // eta2 * sum = 0.3
  outcome.feedback = -0.5 + 0.4 + 0.3;
  outcome.reward = 0.1;

  const RewardDecomposition parts = decompose_provider_reward(outcome, provider);
  CHECK(parts.drift_part == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(parts.rec_part == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(parts.feedback_part == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(parts.drift_part + parts.rec_part + parts.feedback_part == outcome.reward);

  // m = 0 step: everything is drift.
  env::ProviderOutcome idle;
  idle.recommendation_count = 0;
  idle.sum_reward = 0.0;
  idle.feedback = -0.5;
  idle.reward = -0.04;
  const RewardDecomposition drift_only = decompose_provider_reward(idle, provider);
  CHECK(drift_only.rec_part == 0.0);
  CHECK(drift_only.feedback_part == 0.0);
  CHECK(drift_only.drift_part == idle.reward);

  // eta2 = 0: no feedback share regardless of rewards.
  ProviderState no_feedback = provider;
  no_feedback.feedback_sensitivity = 0.0;
  const RewardDecomposition no_fb = decompose_provider_reward(outcome, no_feedback);
  CHECK(no_fb.feedback_part == 0.0);

  // Zero feedback leaves satisfaction unchanged, so every share is zero.
  env::ProviderOutcome balanced;
  balanced.recommendation_count = 2;
  balanced.sum_reward = 0.5;
  balanced.feedback = 0.0;
  balanced.reward = 0.0;
  const RewardDecomposition zero = decompose_provider_reward(balanced, provider);
  CHECK(zero.drift_part == 0.0);
  CHECK(zero.rec_part == 0.0);
  CHECK(zero.feedback_part == 0.0);
}

TEST_CASE("random rollout metrics match a hand replay and telescope exactly") {
  const Scenario scenario = tiny_scenario();
  const std::uint64_t env_seed = 99;
  const std::uint64_t action_seed = 1234;
  const RolloutMetrics metrics = run_random_episode(scenario.config, env_seed, action_seed);

  env::Environment environment(scenario.config, env_seed);
  RngStream rng(action_seed, "rollout_act");
  std::vector<double> initial_satisfaction;
  for (const auto& provider : environment.providers()) {
    initial_satisfaction.push_back(provider.satisfaction);
  }
  double user_sum = 0.0;
  double provider_sum = 0.0;
  double decomposition_sum = 0.0;
  double rec_total = 0.0;
  int steps = 0;
  while (!environment.done()) {
    const std::vector<int> actions =
        agent::random_actions(environment.observation(), scenario.config.num_users, rng);
    const env::StepOutcome outcome = environment.step(actions);
    ++steps;
    for (double r : outcome.user_rewards) user_sum += r;
    for (const auto& po : outcome.providers) {
      provider_sum += po.reward;
      rec_total += po.recommendation_count;
      const auto& provider = environment.providers()[static_cast<std::size_t>(po.provider_id)];
      const RewardDecomposition parts = decompose_provider_reward(po, provider);
      // Exact additivity per provider-step.
      CHECK(std::abs(parts.drift_part + parts.rec_part + parts.feedback_part - po.reward) <=
            1e-12);
      decomposition_sum += parts.drift_part + parts.rec_part + parts.feedback_part;
    }
  }
  CHECK(metrics.user_reward_sum == user_sum);
  CHECK(metrics.provider_reward_sum == provider_sum);
  CHECK(metrics.drift_part + metrics.rec_part + metrics.feedback_part ==
        doctest::Approx(decomposition_sum).epsilon(1e-12));
  CHECK(metrics.viable_end == environment.viable_provider_count());

  // Satisfaction rewards are grid multiples, so the telescoped sum is exact
  // in any summation order.
  double telescoped = 0.0;
  for (std::size_t p = 0; p < environment.providers().size(); ++p) {
    telescoped += environment.providers()[p].satisfaction - initial_satisfaction[p];
  }
  CHECK(metrics.provider_reward_sum == telescoped);

  // Every user is recommended exactly once per executed step.
  double group_total = 0.0;
  for (double g : metrics.group_recommendations) group_total += g;
  CHECK(group_total == rec_total);
  CHECK(group_total == static_cast<double>(scenario.config.num_users * steps));

  // No provider arrivals: the viable count never increases.
  CHECK(static_cast<int>(metrics.viable_series.size()) == steps);
  for (std::size_t t = 1; t < metrics.viable_series.size(); ++t) {
    CHECK(metrics.viable_series[t] <= metrics.viable_series[t - 1]);
  }
}

TEST_CASE("eco rollout collects events, uplift pairs, and telescoping trajectories") {
  const Scenario scenario = tiny_scenario();
  const agent::EcoAgent agent(tiny_agent_config(scenario, 0.6, 0.05, 5));

  RolloutOptions options;
  options.keep_episode = true;
  options.collect_uplifts = true;
  RolloutResult rolled = run_eco_episode(agent, scenario.config, 7, 8, options);

  const int steps = static_cast<int>(rolled.metrics.viable_series.size());
  CHECK(steps >= 1);
  CHECK(rolled.metrics.event_count ==
        static_cast<long long>(steps * scenario.config.num_users));
  CHECK(rolled.metrics.scatter.size() == static_cast<std::size_t>(rolled.metrics.event_count));
  CHECK(rolled.episode.events.size() == static_cast<std::size_t>(rolled.metrics.event_count));

  // Scatter satisfactions must be real decision-time satisfactions: step-0
  // events carry the provider's initial satisfaction from the true env state.
  env::Environment reference(scenario.config, 7);
  for (std::size_t e = 0; e < rolled.episode.events.size(); ++e) {
    const auto& event = rolled.episode.events[e];
    if (event.step != 0) continue;
    const auto& snapshot = rolled.episode.steps[0];
    const int pid = snapshot.groups[static_cast<std::size_t>(event.group_index)].provider_id;
    CHECK(rolled.metrics.scatter[e].first ==
          reference.providers()[static_cast<std::size_t>(pid)].satisfaction);
    CHECK(rolled.metrics.scatter[e].second ==
          doctest::Approx(event.factual - event.counterfactual).epsilon(1e-15));
  }

  // Per-provider trajectories telescope to the episode provider reward.
  double telescoped = 0.0;
  for (const auto& trajectory : rolled.episode.providers) {
    if (trajectory.satisfaction.empty()) continue;
    telescoped += trajectory.satisfaction.back() - trajectory.initial_satisfaction;
  }
  CHECK(rolled.metrics.provider_reward_sum == telescoped);

  // Same seeds, same rollout, bitwise.
  RolloutResult again = run_eco_episode(agent, scenario.config, 7, 8, options);
  CHECK(again.metrics.user_reward_sum == rolled.metrics.user_reward_sum);
  CHECK(again.metrics.provider_reward_sum == rolled.metrics.provider_reward_sum);
  CHECK(again.metrics.scatter == rolled.metrics.scatter);
}

TEST_CASE("train_agent: epochs=0 returns the untrained agent unchanged") {
  const Scenario scenario = tiny_scenario();
  agent::EcoAgent agent(tiny_agent_config(scenario, 0.4, 0.05, 11));
  std::vector<double> before;
  for (int b = 0; b < agent.params().count(); ++b) {
    const auto& data = agent.params().block(b).value.data;
    before.insert(before.end(), data.begin(), data.end());
  }

  TrainOptions options;
  options.epochs = 0;
  const TrainResult result = train_agent(agent, scenario, options, 21);
  CHECK(result.curve.empty());
  CHECK(result.epochs_run == 0);
  CHECK_FALSE(result.diverged);
  std::vector<double> after;
  for (int b = 0; b < agent.params().count(); ++b) {
    const auto& data = agent.params().block(b).value.data;
    after.insert(after.end(), data.begin(), data.end());
  }
  CHECK(after == before);
}

TEST_CASE("train_agent is deterministic and reduces utility losses") {
  const Scenario scenario = tiny_scenario();
  TrainOptions options;
  options.epochs = 20;
  options.envs_per_epoch = 5;
  options.plateau_epochs = 0;  // fixed length for the comparison

  agent::EcoAgent first(tiny_agent_config(scenario, 0.5, 0.1, 3));
  const TrainResult a = train_agent(first, scenario, options, 77);
  agent::EcoAgent second(tiny_agent_config(scenario, 0.5, 0.1, 3));
  const TrainResult b = train_agent(second, scenario, options, 77);

  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t e = 0; e < a.curve.size(); ++e) {
    CHECK(a.curve[e].objective == b.curve[e].objective);
    CHECK(a.curve[e].user_return == b.curve[e].user_return);
    CHECK(a.curve[e].uplift == b.curve[e].uplift);
    CHECK(a.curve[e].user_loss == b.curve[e].user_loss);
    CHECK(a.curve[e].provider_loss == b.curve[e].provider_loss);
    CHECK(a.curve[e].user_reward_sum == b.curve[e].user_reward_sum);
  }
  CHECK_FALSE(a.diverged);
  CHECK(a.epochs_run == 20);

  // Utility models fit the observed returns: later losses drop well below
  // the untrained start.
  const auto window_mean = [&](std::size_t from, std::size_t count, bool user) {
    double sum = 0.0;
    for (std::size_t e = from; e < from + count; ++e) {
      sum += user ? a.curve[e].user_loss : a.curve[e].provider_loss;
    }
    return sum / static_cast<double>(count);
  };
  CHECK(window_mean(15, 5, true) < window_mean(0, 5, true));
  CHECK(window_mean(15, 5, false) < window_mean(0, 5, false));
}

TEST_CASE("evaluate is deterministic, supports n=1, and sees churn under random") {
  const Scenario scenario = tiny_scenario();
  EvalOptions options;
  options.n_rollouts = 8;

  const EvalSummary a = evaluate_random(scenario, options, 31);
  const EvalSummary b = evaluate_random(scenario, options, 31);
  CHECK(a.user_reward_sum.mean == b.user_reward_sum.mean);
  CHECK(a.user_reward_sum.se == b.user_reward_sum.se);
  CHECK(a.provider_reward_sum.mean == b.provider_reward_sum.mean);
  CHECK(a.viable_end.mean == b.viable_end.mean);
  REQUIRE(a.groups.size() == 1);
  CHECK(a.groups[0].group == "providers");
  CHECK(a.groups[0].recommendations.mean == b.groups[0].recommendations.mean);
  CHECK(a.viable_series == b.viable_series);
  CHECK(static_cast<int>(a.viable_series.size()) == scenario.config.horizon);

  // Per-capita views are the sums rescaled by the population sizes.
  CHECK(a.user_reward_per_user.mean ==
        doctest::Approx(a.user_reward_sum.mean / scenario.config.num_users).epsilon(1e-15));
  CHECK(a.provider_reward_per_provider.mean ==
        doctest::Approx(a.provider_reward_sum.mean / scenario.config.num_providers)
            .epsilon(1e-15));

  EvalOptions single;
  single.n_rollouts = 1;
  const EvalSummary one = evaluate_random(scenario, single, 31);
  CHECK(one.n == 1);
  CHECK(one.user_reward_sum.se == 0.0);
  CHECK(one.provider_reward_sum.se == 0.0);
  CHECK(one.viable_end.se == 0.0);

  // The paper-scale default config churns some providers under uniform
  // random exposure.
  const Scenario defaults = builtin_scenario("saturated_log");
  EvalOptions full;
  full.n_rollouts = 50;
  const EvalSummary random_eval = evaluate_random(defaults, full, 2024);
  CHECK(random_eval.viable_end.mean < 10.0);
  CHECK(random_eval.viable_end.mean > 0.0);

  // The eco path is deterministic too, and threads do not change results.
  const agent::EcoAgent agent(tiny_agent_config(scenario, 0.3, 0.05, 17));
  EvalOptions eco_options;
  eco_options.n_rollouts = 6;
  eco_options.collect_uplifts = true;
  const EvalSummary e1 = evaluate_agent(agent, scenario, eco_options, 41);
  eco_options.threads = 3;
  const EvalSummary e2 = evaluate_agent(agent, scenario, eco_options, 41);
  CHECK(e1.user_reward_sum.mean == e2.user_reward_sum.mean);
  CHECK(e1.mean_event_user_return == e2.mean_event_user_return);
  CHECK(e1.mean_event_uplift == e2.mean_event_uplift);
  CHECK(e1.scatter == e2.scatter);
  CHECK_FALSE(e1.scatter.empty());
}

TEST_CASE("builtin scenarios match their documented shapes") {
  CHECK(builtin_scenario_names() ==
        std::vector<std::string>{"saturated_log", "linear", "subgroup_init", "subgroup_slope"});

  const Scenario sat = builtin_scenario("saturated_log");
  CHECK(sat.family == ScenarioFamily::SaturatedLog);
  CHECK(sat.config.num_users == 50);
  CHECK(sat.config.num_providers == 10);
  CHECK(sat.config.initial_docs_per_provider == 20);
  CHECK(sat.config.num_topics == 10);
  CHECK(sat.config.horizon == 20);
  CHECK(sat.config.gamma_user == 0.99);
  CHECK(sat.config.gamma_provider == 0.99);
  CHECK_NOTHROW(sat.config.validate());

  const Scenario lin = builtin_scenario("linear");
  CHECK(lin.family == ScenarioFamily::Linear);
  for (const auto& group : lin.config.provider_groups) {
    CHECK(group.satisfaction_kind == SatisfactionFn::Kind::Linear);
  }
  CHECK_NOTHROW(lin.config.validate());

  // Subgroup scenarios: two groups identical except the one contrasted field.
  const Scenario init = builtin_scenario("subgroup_init");
  REQUIRE(init.config.provider_groups.size() == 2);
  const auto& ia = init.config.provider_groups[0];
  const auto& ib = init.config.provider_groups[1];
  CHECK(ia.offset_x0.lo != ib.offset_x0.lo);
  CHECK(ia.satisfaction_param.lo == ib.satisfaction_param.lo);
  CHECK(ia.no_rec_drift.lo == ib.no_rec_drift.lo);
  CHECK(ia.viability_threshold.lo == ib.viability_threshold.lo);
  CHECK_NOTHROW(init.config.validate());

  const Scenario slope = builtin_scenario("subgroup_slope");
  REQUIRE(slope.config.provider_groups.size() == 2);
  const auto& sa = slope.config.provider_groups[0];
  const auto& sb = slope.config.provider_groups[1];
  CHECK(sa.satisfaction_kind == SatisfactionFn::Kind::Linear);
  CHECK(sb.satisfaction_param.lo > sa.satisfaction_param.lo);  // eta_B > eta_A
  CHECK(sa.offset_x0.lo == sb.offset_x0.lo);
  CHECK(sa.exposure_sensitivity.lo == sb.exposure_sensitivity.lo);
  CHECK_NOTHROW(slope.config.validate());

  CHECK_THROWS_WITH_AS(builtin_scenario("nope"),
                       doctest::Contains("saturated_log"), ConfigError);
}

TEST_CASE("scenario JSON round trip and file loading") {
  const Scenario slope = builtin_scenario("subgroup_slope");
  const std::string text = scenario_to_json(slope);
  const Scenario back = scenario_from_json(text);
  CHECK(back.name == slope.name);
  CHECK(back.family == slope.family);
  CHECK(back.description == slope.description);
  CHECK(to_json(back.config) == to_json(slope.config));
  // Serialize -> load -> serialize is a fixed point.
  CHECK(scenario_to_json(back) == text);

  // Family inference from a bare config recognizes the subgroup structure.
  nlohmann::json bare_wrapper;
  bare_wrapper["config"] = nlohmann::json::parse(to_json(slope.config));
  const Scenario inferred = scenario_from_json(bare_wrapper.dump());
  CHECK(inferred.family == ScenarioFamily::SubgroupLinearSlope);
  const Scenario init = builtin_scenario("subgroup_init");
  nlohmann::json init_wrapper;
  init_wrapper["config"] = nlohmann::json::parse(to_json(init.config));
  CHECK(scenario_from_json(init_wrapper.dump()).family ==
        ScenarioFamily::SubgroupInitSatisfaction);

  // load_scenario accepts wrapped files and bare config files.
  const auto dir = fresh_dir("scenario_files");
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "wrapped.json");
    out << text;
  }
  const Scenario from_file = load_scenario((dir / "wrapped.json").string());
  CHECK(to_json(from_file.config) == to_json(slope.config));
  CHECK(from_file.name == "subgroup_slope");
  {
    std::ofstream out(dir / "bare_config.json");
    out << to_json(tiny_scenario().config);
  }
  const Scenario bare = load_scenario((dir / "bare_config.json").string());
  CHECK(bare.name == "bare_config");
  CHECK(bare.family == ScenarioFamily::SaturatedLog);

  // Invalid configs surface as ConfigError naming the field.
  EnvironmentConfig bad = tiny_scenario().config;
  bad.num_topics = 1;
  nlohmann::json bad_wrapper;
  bad_wrapper["config"] = nlohmann::json::parse(to_json(bad));
  CHECK_THROWS_AS(scenario_from_json(bad_wrapper.dump()), ConfigError);

  CHECK_THROWS_AS(load_scenario("no_such_scenario_or_file"), ConfigError);
}

TEST_CASE("lambda_sweep with a single cell reduces to train + evaluate") {
  const Scenario scenario = tiny_scenario();
  SweepOptions options;
  options.lambdas = {0.0};
  options.learning_rates = {0.05};
  options.train.epochs = 2;
  options.train.envs_per_epoch = 3;
  options.eval.n_rollouts = 3;

  const std::uint64_t seed = 500;
  const SweepResult sweep = lambda_sweep(scenario, options, seed);
  REQUIRE(sweep.cells.size() == 1);
  CHECK(sweep.selected == std::vector<std::size_t>{0});
  CHECK(sweep.cells[0].selected);
  CHECK_FALSE(sweep.cells[0].diverged);
  CHECK(sweep.cells[0].epochs_run == 2);

  // Rebuild the same cell by hand from the sweep's derived seeds.
  agent::EcoAgent agent(agent::agent_config_for(
      scenario.config, 0.0, 0.05, RngStream(seed, "sweep_agent", 0, 0).next_u64()));
  train_agent(agent, scenario, options.train, RngStream(seed, "sweep_train", 0, 0).next_u64());
  EvalOptions eval = options.eval;
  eval.collect_uplifts = true;
  const EvalSummary direct =
      evaluate_agent(agent, scenario, eval, RngStream(seed, "sweep_eval").next_u64());
  CHECK(sweep.cells[0].eval.user_reward_sum.mean == direct.user_reward_sum.mean);
  CHECK(sweep.cells[0].eval.provider_reward_sum.mean == direct.provider_reward_sum.mean);
  CHECK(sweep.cells[0].eval.mean_event_user_return == direct.mean_event_user_return);
  CHECK(sweep.cells[0].objective == direct.user_reward_per_user.mean);  // lambda = 0

  // The random baseline shares the evaluation seeds.
  const EvalSummary random_direct =
      evaluate_random(scenario, options.eval, RngStream(seed, "sweep_eval").next_u64());
  CHECK(sweep.random_baseline.user_reward_sum.mean == random_direct.user_reward_sum.mean);

  SweepOptions empty_grid;
  empty_grid.lambdas.clear();
  CHECK_THROWS_AS(lambda_sweep(scenario, empty_grid, 1), UsageError);
}

TEST_CASE("sweep results survive the JSON round trip losslessly") {
  const SweepResult original = synthetic_sweep();
  const std::string text = sweep_result_to_json(original);
  const SweepResult back = sweep_result_from_json(text);
  CHECK(sweep_result_to_json(back) == text);
  CHECK(back.scenario == original.scenario);
  CHECK(back.cells.size() == original.cells.size());
  CHECK(back.cells[1].eval.feedback_part.mean == original.cells[1].eval.feedback_part.mean);
  CHECK(back.cells[0].eval.scatter == original.cells[0].eval.scatter);
  CHECK(back.random_baseline.viable_series == original.random_baseline.viable_series);
}

TEST_CASE("emit_report writes schema-stable files with a hashed manifest") {
  const SweepResult sweep = synthetic_sweep();
  const auto dir_a = fresh_dir("report_a");
  emit_report(sweep, dir_a.string());

  const std::vector<std::string> expected = {
      "fig4_provider_reward.csv", "fig5_pareto.csv", "fig6_decomposition.csv",
      "fig8_scatter.csv",         "fig9_linear.csv", "fig11_subgroup.csv",
      "fig12_rec_counts.csv",     "summary.csv",     "fig4.svg",
      "fig5.svg",                 "fig6.svg",        "fig8.svg",
      "fig9.svg",                 "fig11.svg",       "fig12.svg",
      "manifest.json"};
  for (const auto& name : expected) {
    CHECK_MESSAGE(std::filesystem::exists(dir_a / name), name);
  }

  const std::string pareto = slurp(dir_a / "fig5_pareto.csv");
  CHECK(pareto.rfind("lambda,user_reward_mean,user_reward_se,provider_reward_mean,"
                     "provider_reward_se\n",
                     0) == 0);
  CHECK(pareto.find("\n0,100,2,-4,0.5\n") != std::string::npos);
  CHECK(pareto.find("\n1,101,2,-2,0.5\n") != std::string::npos);

  // 9-significant-digit formatting in CSV bodies.
  const std::string decomposition = slurp(dir_a / "fig6_decomposition.csv");
  CHECK(decomposition.find("0.623456789") != std::string::npos);

  const std::string scatter = slurp(dir_a / "fig8_scatter.csv");
  int lines = 0;
  for (char c : scatter) lines += c == '\n';
  CHECK(lines == 1 + 6);  // header + 3 points per selected lambda

  // Group rows appear per lambda and group.
  const std::string recs = slurp(dir_a / "fig12_rec_counts.csv");
  CHECK(recs.find("0,A,30,1") != std::string::npos);
  CHECK(recs.find("1,B,49,1") != std::string::npos);

  // Manifest hashes match the emitted bytes; generated_at is the only
  // unstable field.
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir_a / "manifest.json"));
  CHECK(manifest.at("files").size() == expected.size() - 1);
  for (const auto& entry : manifest.at("files")) {
    const std::string content = slurp(dir_a / entry.at("name").get<std::string>());
    CHECK(entry.at("bytes").get<std::size_t>() == content.size());
    const std::uint64_t h = fnv1a64(content);
    char hex[17];
    for (int i = 0; i < 16; ++i) hex[15 - i] = "0123456789abcdef"[(h >> (4 * i)) & 0xF];
    hex[16] = '\0';
    CHECK(entry.at("fnv1a64").get<std::string>() == std::string(hex));
  }

  // Byte-identical re-emission (manifest modulo timestamp).
  const auto dir_b = fresh_dir("report_b");
  emit_report(sweep, dir_b.string());
  for (const auto& name : expected) {
    if (name == "manifest.json") continue;
    CHECK_MESSAGE(slurp(dir_a / name) == slurp(dir_b / name), name);
  }
  nlohmann::json manifest_b = nlohmann::json::parse(slurp(dir_b / "manifest.json"));
  nlohmann::json manifest_a = manifest;
  manifest_a.erase("generated_at");
  manifest_b.erase("generated_at");
  CHECK(manifest_a == manifest_b);

  // Empty sweep: header-only CSVs, files still present.
  const auto dir_empty = fresh_dir("report_empty");
  emit_report(SweepResult{}, dir_empty.string());
  CHECK(slurp(dir_empty / "fig5_pareto.csv") ==
        "lambda,user_reward_mean,user_reward_se,provider_reward_mean,provider_reward_se\n");
  CHECK(slurp(dir_empty / "fig8_scatter.csv") ==
        "lambda,provider_satisfaction,predicted_uplift\n");
  CHECK(std::filesystem::exists(dir_empty / "fig4.svg"));
}

TEST_CASE("parallel_for matches serial execution and propagates errors") {
  std::vector<int> serial(23, 0);
  std::vector<int> threaded(23, 0);
  parallel_for(23, 1, [&](int i) { serial[static_cast<std::size_t>(i)] = i * i; });
  parallel_for(23, 4, [&](int i) { threaded[static_cast<std::size_t>(i)] = i * i; });
  CHECK(serial == threaded);
  CHECK_THROWS_AS(parallel_for(5, 2,
                               [](int i) {
                                 if (i == 3) throw UsageError("boom");
                               }),
                  UsageError);
}
