#include "ecosim/cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ecosim/agent/audit.hpp"
#include "ecosim/agent/eco_agent.hpp"
#include "ecosim/core/errors.hpp"
#include "ecosim/harness/experiment.hpp"
#include "ecosim/harness/probes.hpp"
#include "ecosim/harness/report.hpp"
#include "ecosim/harness/scenarios.hpp"
#include "ecosim/harness/stats.hpp"

namespace ecosim::cli {

namespace {

namespace fs = std::filesystem;

/// Everything a subcommand can consume; each subcommand binds the subset of
/// flags it supports.
struct RunArgs {
  std::string scenario = "saturated_log";
  std::string config_path;
  double lambda = 0.6;
  double learning_rate = 0.05;
  std::vector<double> lambda_grid;         // sweep override, empty = default grid
  std::vector<double> learning_rate_grid;  // sweep override, empty = default grid
  int epochs = 300;
  int rollouts = 50;
  std::uint64_t seed = 0;
  std::string out;
  std::string checkpoint;
  std::string agent_kind = "eco";
  bool greedy_eval = false;
  bool constant_baseline = false;
  int threads = 1;
};

harness::Scenario resolve_scenario(const RunArgs& args) {
  if (!args.config_path.empty()) return harness::load_scenario(args.config_path);
  return harness::load_scenario(args.scenario);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string with_newline(std::string text) {
  if (text.empty() || text.back() != '\n') text.push_back('\n');
  return text;
}

std::string csv_cell(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string training_curve_csv(const harness::TrainResult& result) {
  std::string csv =
      "epoch,objective,user_return,uplift,user_loss,provider_loss,"
      "user_reward_sum,provider_reward_sum\n";
  for (const auto& epoch : result.curve) {
    csv += std::to_string(epoch.epoch);
    csv += ',';
    csv += harness::format_number(epoch.objective);
    csv += ',';
    csv += harness::format_number(epoch.user_return);
    csv += ',';
    csv += harness::format_number(epoch.uplift);
    csv += ',';
    csv += harness::format_number(epoch.user_loss);
    csv += ',';
    csv += harness::format_number(epoch.provider_loss);
    csv += ',';
    csv += harness::format_number(epoch.user_reward_sum);
    csv += ',';
    csv += harness::format_number(epoch.provider_reward_sum);
    csv += '\n';
  }
  return csv;
}

std::string evaluation_csv(const harness::EvalSummary& summary, bool with_model) {
  std::string csv = "metric,mean,se\n";
  auto stat_row = [&](const std::string& name, const harness::MetricStat& stat) {
    csv += csv_cell(name);
    csv += ',';
    csv += harness::format_number(stat.mean);
    csv += ',';
    csv += harness::format_number(stat.se);
    csv += '\n';
  };
  auto scalar_row = [&](const std::string& name, const std::string& value) {
    csv += csv_cell(name);
    csv += ',';
    csv += value;
    csv += ",\n";
  };
  scalar_row("episodes", std::to_string(summary.n));
  stat_row("user_reward_sum", summary.user_reward_sum);
  stat_row("user_reward_per_user", summary.user_reward_per_user);
  stat_row("provider_reward_sum", summary.provider_reward_sum);
  stat_row("provider_reward_per_provider", summary.provider_reward_per_provider);
  stat_row("viable_end", summary.viable_end);
  stat_row("drift_part", summary.drift_part);
  stat_row("recommendation_part", summary.rec_part);
  stat_row("feedback_part", summary.feedback_part);
  for (const auto& group : summary.groups) {
    stat_row("group_" + group.group + "_recommendations", group.recommendations);
    stat_row("group_" + group.group + "_viable_end", group.viable_end);
  }
  if (with_model) {
    scalar_row("mean_event_user_return",
               harness::format_number(summary.mean_event_user_return));
    scalar_row("mean_event_uplift", harness::format_number(summary.mean_event_uplift));
    const auto corr = harness::uplift_satisfaction_correlation(summary.scatter);
    scalar_row("uplift_satisfaction_pearson", harness::format_number(corr.pearson));
    scalar_row("uplift_satisfaction_spearman", harness::format_number(corr.spearman));
    scalar_row("scatter_events", std::to_string(corr.n));
  }
  return csv;
}

std::string scatter_csv(const harness::EvalSummary& summary) {
  std::string csv = "provider_satisfaction,predicted_uplift\n";
  for (const auto& [satisfaction, uplift] : summary.scatter) {
    csv += harness::format_number(satisfaction);
    csv += ',';
    csv += harness::format_number(uplift);
    csv += '\n';
  }
  return csv;
}

std::string viable_series_csv(const harness::EvalSummary& summary) {
  std::string csv = "step,viable_mean\n";
  for (std::size_t t = 0; t < summary.viable_series.size(); ++t) {
    csv += std::to_string(t);
    csv += ',';
    csv += harness::format_number(summary.viable_series[t]);
    csv += '\n';
  }
  return csv;
}

agent::AgentConfig build_agent_config(const harness::Scenario& scenario,
                                      const RunArgs& args) {
  agent::AgentConfig config = agent::agent_config_for(scenario.config, args.lambda,
                                                      args.learning_rate, args.seed);
  config.constant_baseline = args.constant_baseline;
  return config;
}

harness::TrainOptions build_train_options(const RunArgs& args) {
  harness::TrainOptions options;
  options.epochs = args.epochs;
  options.threads = args.threads;
  options.log_progress = true;
  return options;
}

/// Trains a fresh agent and writes training_curve.csv; returns the failure
/// exit code (2) when training diverged, 0 otherwise.
int train_into(agent::EcoAgent& agent, const harness::Scenario& scenario,
               const RunArgs& args) {
  const harness::TrainResult result =
      harness::train_agent(agent, scenario, build_train_options(args), args.seed);
  write_text(fs::path(args.out) / "training_curve.csv", training_curve_csv(result));
  if (result.diverged) {
    std::fprintf(stderr, "error: %s\n", result.diagnostic.c_str());
    return 2;
  }
  agent.save_checkpoint((fs::path(args.out) / "agent.ckpt").string());
  std::fprintf(stderr, "[train] finished after %d epochs\n", result.epochs_run);
  return 0;
}

int cmd_train(const RunArgs& args) {
  const harness::Scenario scenario = resolve_scenario(args);
  fs::create_directories(args.out);
  write_text(fs::path(args.out) / "scenario.json",
             with_newline(harness::scenario_to_json(scenario)));
  agent::EcoAgent agent(build_agent_config(scenario, args));
  return train_into(agent, scenario, args);
}

int cmd_evaluate(const RunArgs& args, bool lambda_given) {
  const harness::Scenario scenario = resolve_scenario(args);
  fs::create_directories(args.out);
  write_text(fs::path(args.out) / "scenario.json",
             with_newline(harness::scenario_to_json(scenario)));

  harness::EvalOptions options;
  options.n_rollouts = args.rollouts;
  options.greedy = args.greedy_eval;
  options.threads = args.threads;

  const bool with_model = args.agent_kind == "eco";
  harness::EvalSummary summary;
  if (!with_model) {
    summary = harness::evaluate_random(scenario, options, args.seed);
  } else {
    options.collect_uplifts = true;
    if (!args.checkpoint.empty()) {
      agent::EcoAgent agent =
          lambda_given ? agent::EcoAgent::load_checkpoint(args.checkpoint, args.lambda)
                       : agent::EcoAgent::load_checkpoint(args.checkpoint);
      summary = harness::evaluate_agent(agent, scenario, options, args.seed);
    } else {
      agent::EcoAgent agent(build_agent_config(scenario, args));
      if (int code = train_into(agent, scenario, args); code != 0) return code;
      summary = harness::evaluate_agent(agent, scenario, options, args.seed);
    }
  }

  write_text(fs::path(args.out) / "evaluation.csv", evaluation_csv(summary, with_model));
  write_text(fs::path(args.out) / "viable_series.csv", viable_series_csv(summary));
  if (with_model) {
    write_text(fs::path(args.out) / "eval_scatter.csv", scatter_csv(summary));
  }
  std::fprintf(stderr,
               "[evaluate] %s agent, %d episodes: user_reward_sum %.6g, "
               "provider_reward_sum %.6g, viable_end %.6g\n",
               args.agent_kind.c_str(), summary.n, summary.user_reward_sum.mean,
               summary.provider_reward_sum.mean, summary.viable_end.mean);
  return 0;
}

int cmd_sweep(const RunArgs& args) {
  const harness::Scenario scenario = resolve_scenario(args);
  fs::create_directories(args.out);
  write_text(fs::path(args.out) / "scenario.json",
             with_newline(harness::scenario_to_json(scenario)));

  harness::SweepOptions options;
  if (!args.lambda_grid.empty()) options.lambdas = args.lambda_grid;
  if (!args.learning_rate_grid.empty()) options.learning_rates = args.learning_rate_grid;
  options.constant_baseline = args.constant_baseline;
  options.train = build_train_options(args);
  options.eval.n_rollouts = args.rollouts;
  options.eval.greedy = args.greedy_eval;
  options.eval.threads = args.threads;

  const harness::SweepResult result = harness::lambda_sweep(scenario, options, args.seed);
  write_text(fs::path(args.out) / "sweep_result.json",
             with_newline(harness::sweep_result_to_json(result)));
  harness::emit_report(result, args.out);
  std::fprintf(stderr, "[sweep] report written to %s\n", args.out.c_str());
  return 0;
}

int cmd_plot(const RunArgs& args) {
  const harness::SweepResult result = harness::sweep_result_from_json(
      read_text(fs::path(args.out) / "sweep_result.json"));
  harness::emit_report(result, args.out);
  std::fprintf(stderr, "[plot] report written to %s\n", args.out.c_str());
  return 0;
}

int cmd_selftest() {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto report = agent::audit_gradients(seed);
    const bool pass = report.checked > 0 && report.pass(1e-4);
    std::fprintf(stderr,
                 "[selftest] gradient audit seed %llu: %d entries, max rel err %.3g (%s)\n",
                 static_cast<unsigned long long>(seed), report.checked,
                 report.max_rel_err, pass ? "ok" : "FAIL");
    ok = ok && pass;
  }
  const auto probe = harness::uplift_additivity_probe();
  const bool probe_pass = probe.pass(1e-9);
  std::fprintf(stderr,
               "[selftest] uplift additivity: error %.3g, cross effect %.3g, "
               "min uplift %.3g (%s)\n",
               probe.max_additivity_error, probe.max_cross_effect,
               probe.min_uplift_magnitude, probe_pass ? "ok" : "FAIL");
  ok = ok && probe_pass;
  std::fprintf(stderr, "[selftest] %s\n", ok ? "all checks passed" : "FAILED");
  return ok ? 0 : 2;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  RunArgs parsed;
  CLI::App app{
      "Seeded simulator of a user/provider recommendation ecosystem with a "
      "provider-aware policy-gradient agent"};
  app.require_subcommand(1);

  CLI::Option* seed_options[3] = {nullptr, nullptr, nullptr};
  CLI::Option* lambda_option = nullptr;

  auto add_scenario_flags = [&](CLI::App* sub) {
    auto* name = sub->add_option("--scenario", parsed.scenario,
                                 "built-in scenario name or config file path");
    sub->add_option("--config", parsed.config_path, "environment config JSON path")
        ->excludes(name);
  };
  auto add_run_flags = [&](CLI::App* sub, int seed_slot) {
    seed_options[seed_slot] =
        sub->add_option("--seed", parsed.seed, "master seed (required)");
    sub->add_option("--out", parsed.out, "output directory")->required();
    sub->add_option("--epochs", parsed.epochs, "training epoch cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", parsed.threads, "worker threads for rollouts")
        ->envname("ECOSIM_THREADS");
    sub->add_flag("--constant-baseline", parsed.constant_baseline,
                  "subtract a constant-prediction baseline inside the agent");
  };

  CLI::App* train = app.add_subcommand("train", "train one agent and checkpoint it");
  add_scenario_flags(train);
  add_run_flags(train, 0);
  train->add_option("--lambda", parsed.lambda, "provider weight in [0, 1]");
  train->add_option("--lr", parsed.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "train (or load) an agent and evaluate it");
  add_scenario_flags(evaluate);
  add_run_flags(evaluate, 1);
  lambda_option =
      evaluate->add_option("--lambda", parsed.lambda, "provider weight in [0, 1]");
  evaluate->add_option("--lr", parsed.learning_rate, "learning rate")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--rollouts", parsed.rollouts, "evaluation episodes")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--checkpoint", parsed.checkpoint,
                       "evaluate this checkpoint instead of training");
  evaluate->add_option("--agent", parsed.agent_kind, "agent to evaluate")
      ->check(CLI::IsMember({"eco", "random"}));
  evaluate->add_flag("--greedy-eval", parsed.greedy_eval,
                     "evaluate with argmax actions instead of sampling");

  CLI::App* sweep =
      app.add_subcommand("sweep", "train across the lambda grid and emit the report");
  add_scenario_flags(sweep);
  add_run_flags(sweep, 2);
  sweep->add_option("--lambda", parsed.lambda_grid,
                    "lambda grid override (repeatable)");
  sweep->add_option("--lr", parsed.learning_rate_grid,
                    "learning-rate grid override (repeatable)");
  sweep->add_option("--rollouts", parsed.rollouts, "evaluation episodes per cell")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--greedy-eval", parsed.greedy_eval,
                  "evaluate with argmax actions instead of sampling");

  CLI::App* plot =
      app.add_subcommand("plot", "regenerate the report from sweep_result.json");
  plot->add_option("--out", parsed.out, "directory holding sweep_result.json")
      ->required();

  app.add_subcommand("selftest",
                     "run the gradient finite-difference audit and the "
                     "uplift additivity probe");

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ecosim");
    for (const auto& arg : args) argv.push_back(arg.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (sub == "train" || sub == "evaluate" || sub == "sweep") {
      const int slot = sub == "train" ? 0 : sub == "evaluate" ? 1 : 2;
      if (seed_options[slot]->count() == 0) {
        std::fprintf(stderr, "error: --seed is required for %s (no wall-clock default)\n",
                     sub.c_str());
        return 1;
      }
    }
    if (sub == "train") return cmd_train(parsed);
    if (sub == "evaluate") return cmd_evaluate(parsed, lambda_option->count() > 0);
    if (sub == "sweep") return cmd_sweep(parsed);
    if (sub == "plot") return cmd_plot(parsed);
    return cmd_selftest();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace ecosim::cli
