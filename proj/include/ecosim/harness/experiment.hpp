#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ecosim/agent/eco_agent.hpp"
#include "ecosim/harness/rollout.hpp"
#include "ecosim/harness/scenarios.hpp"
#include "ecosim/harness/stats.hpp"

namespace ecosim::harness {

struct TrainOptions {
  int epochs = 300;
  int envs_per_epoch = 10;
  int plateau_epochs = 30;  // stop after this many epochs without a new best realized return mix; <= 0 disables
  int warmup_epochs = 20;   // utility-only epochs before policy updates; capped at epochs / 3
  int threads = 1;
  bool log_progress = false;  // one line per epoch on stderr
};

struct EpochStats {
  int epoch = 0;
  double objective = 0.0;    // lambda-weighted mean event objective
  double user_return = 0.0;  // mean event discounted user return
  double uplift = 0.0;       // mean event predicted uplift
  double user_loss = 0.0;
  double provider_loss = 0.0;
  double user_reward_sum = 0.0;      // per-episode sums, averaged over the epoch's rollouts
  double provider_reward_sum = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> curve;
  int epochs_run = 0;
  bool diverged = false;
  std::string diagnostic;  // set when diverged
};

/// Runs REINFORCE epochs in place on `agent`: each epoch rolls out
/// envs_per_epoch fresh environments (seeds derived from `seed`) with sampled
/// actions and applies one update. The first warmup epochs train only the
/// utility models, so the policy starts moving against informed uplift
/// estimates. Stops early on plateau or divergence (non-finite parameters or
/// objective).
TrainResult train_agent(agent::EcoAgent& agent, const Scenario& scenario,
                        const TrainOptions& options, std::uint64_t seed);

struct EvalOptions {
  int n_rollouts = 50;
  bool greedy = false;
  bool collect_uplifts = false;
  int threads = 1;
};

struct GroupStat {
  std::string group;
  MetricStat recommendations;
  MetricStat viable_end;
};

/// Mean and standard error of every rollout metric over n independent
/// episodes, plus pooled model-side quantities when uplift collection is on.
struct EvalSummary {
  int n = 0;
  MetricStat user_reward_sum;
  MetricStat user_reward_per_user;
  MetricStat provider_reward_sum;
  MetricStat provider_reward_per_provider;
  MetricStat viable_end;
  MetricStat drift_part;
  MetricStat rec_part;
  MetricStat feedback_part;
  std::vector<GroupStat> groups;
  std::vector<double> viable_series;  // per step, averaged over episodes
  double mean_event_user_return = 0.0;
  double mean_event_uplift = 0.0;
  std::vector<std::pair<double, double>> scatter;  // (satisfaction, uplift) per event
};

/// Evaluation episode seeds depend only on (seed, episode index), so distinct
/// agents evaluated with the same seed face identical environments.
EvalSummary evaluate_agent(const agent::EcoAgent& agent, const Scenario& scenario,
                           const EvalOptions& options, std::uint64_t seed);
EvalSummary evaluate_random(const Scenario& scenario, const EvalOptions& options,
                            std::uint64_t seed);

struct CorrelationResult {
  double pearson = 0.0;   // NaN when undefined
  double spearman = 0.0;  // NaN when undefined
  std::size_t n = 0;
};

/// Correlation between provider satisfaction at decision time and the model's
/// predicted uplift, over all collected events.
CorrelationResult uplift_satisfaction_correlation(
    std::span<const std::pair<double, double>> scatter);

struct SweepOptions {
  std::vector<double> lambdas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> learning_rates = {0.1, 0.03, 0.01};
  bool constant_baseline = false;  // applied to every cell's agent
  TrainOptions train;
  EvalOptions eval;
};

struct SweepCell {
  double lambda = 0.0;
  double learning_rate = 0.0;
  double objective = 0.0;  // lambda-weighted realized per-capita return
  bool diverged = false;
  bool selected = false;   // best learning rate for this lambda
  int epochs_run = 0;
  EvalSummary eval;
};

struct SweepResult {
  std::string scenario;
  std::vector<double> lambdas;
  std::vector<SweepCell> cells;       // lambda-major, learning-rate-minor
  std::vector<std::size_t> selected;  // per lambda, index into cells
  EvalSummary random_baseline;
};

/// Trains and evaluates every (lambda, lr) pair and keeps the best cell per
/// lambda by the lambda-weighted realized per-capita returns. All cells share
/// the same evaluation seeds; scatter data is kept only on selected cells.
SweepResult lambda_sweep(const Scenario& scenario, const SweepOptions& options,
                         std::uint64_t seed);

/// Lossless JSON round trip so reports can be regenerated offline.
std::string sweep_result_to_json(const SweepResult& result);
SweepResult sweep_result_from_json(const std::string& json_text);

}  // namespace ecosim::harness
