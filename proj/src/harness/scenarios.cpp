#include "ecosim/harness/scenarios.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecosim/core/errors.hpp"

namespace ecosim::harness {

namespace {

using core::EnvironmentConfig;
using core::ProviderGroupConfig;
using core::SatisfactionFn;
using core::ScalarDist;

bool same_dist(const ScalarDist& a, const ScalarDist& b) {
  return a.lo == b.lo && a.hi == b.hi;
}

// Field-by-field comparison used to recognize the subgroup families in
// configs loaded from plain files.
bool groups_equal_except(const ProviderGroupConfig& a, const ProviderGroupConfig& b,
                         bool ignore_x0, bool ignore_param) {
  if (a.satisfaction_kind != b.satisfaction_kind) return false;
  if (!same_dist(a.no_rec_drift, b.no_rec_drift)) return false;
  if (!same_dist(a.exposure_sensitivity, b.exposure_sensitivity)) return false;
  if (!same_dist(a.feedback_sensitivity, b.feedback_sensitivity)) return false;
  if (!same_dist(a.preference_drift, b.preference_drift)) return false;
  if (!same_dist(a.creation_rate, b.creation_rate)) return false;
  if (!same_dist(a.quality_mean, b.quality_mean)) return false;
  if (!same_dist(a.quality_std, b.quality_std)) return false;
  if (!same_dist(a.viability_threshold, b.viability_threshold)) return false;
  if (!ignore_x0 && !same_dist(a.offset_x0, b.offset_x0)) return false;
  if (!ignore_param && !same_dist(a.satisfaction_param, b.satisfaction_param)) return false;
  return true;
}

ScenarioFamily classify(const EnvironmentConfig& config) {
  if (config.provider_groups.size() == 2) {
    const auto& a = config.provider_groups[0];
    const auto& b = config.provider_groups[1];
    if (groups_equal_except(a, b, true, false) && !same_dist(a.offset_x0, b.offset_x0)) {
      return ScenarioFamily::SubgroupInitSatisfaction;
    }
    if (a.satisfaction_kind == SatisfactionFn::Kind::Linear &&
        groups_equal_except(a, b, false, true) &&
        !same_dist(a.satisfaction_param, b.satisfaction_param)) {
      return ScenarioFamily::SubgroupLinearSlope;
    }
  }
  for (const auto& group : config.provider_groups) {
    if (group.satisfaction_kind == SatisfactionFn::Kind::SaturatedLog) {
      return ScenarioFamily::SaturatedLog;
    }
  }
  return ScenarioFamily::Linear;
}

EnvironmentConfig common_skeleton() {
  EnvironmentConfig config;
  config.num_topics = 10;
  config.num_users = 50;
  config.num_providers = 10;
  config.initial_docs_per_provider = 20;
  config.horizon = 20;
  config.gamma_user = 0.99;
  config.gamma_provider = 0.99;
  config.user_params.quality_sensitivity = ScalarDist(0.1, 0.5);
  config.user_params.preference_drift = ScalarDist(0.05, 0.35);
  return config;
}

ProviderGroupConfig base_group(const std::string& name, int size) {
  ProviderGroupConfig group;
  group.name = name;
  group.size = size;
  group.no_rec_drift = ScalarDist(-0.8);
  group.exposure_sensitivity = ScalarDist(0.1);
  group.feedback_sensitivity = ScalarDist(0.15);
  group.preference_drift = ScalarDist(0.05);
  group.creation_rate = ScalarDist(2.0);
  group.quality_mean = ScalarDist(-0.2, 0.2);
  group.quality_std = ScalarDist(0.2);
  return group;
}

Scenario make_saturated_log() {
  Scenario scenario;
  scenario.family = ScenarioFamily::SaturatedLog;
  scenario.name = "saturated_log";
  scenario.description =
      "Concave provider satisfaction with heterogeneous establishment; "
      "diluted exposure lets weakly established providers churn.";
  scenario.config = common_skeleton();
  ProviderGroupConfig group = base_group("providers", 10);
  group.satisfaction_kind = SatisfactionFn::Kind::SaturatedLog;
  group.satisfaction_param = ScalarDist(2.0);
  group.offset_x0 = ScalarDist(4.0, 20.0);
  group.viability_threshold = ScalarDist(2.2);
  // Provider welfare is exposure-dominated: where recommendations go matters
  // more than how well they land, so catering to users alone does not
  // maximize provider reward.
  group.exposure_sensitivity = ScalarDist(0.15);
  group.feedback_sensitivity = ScalarDist(0.05);
  scenario.config.provider_groups.push_back(group);
  return scenario;
}

Scenario make_linear() {
  Scenario scenario;
  scenario.family = ScenarioFamily::Linear;
  scenario.name = "linear";
  scenario.description =
      "Linear provider satisfaction; marginal exposure is worth the same "
      "everywhere, so provider totals barely react to the provider constant.";
  scenario.config = common_skeleton();
  ProviderGroupConfig group = base_group("providers", 10);
  group.satisfaction_kind = SatisfactionFn::Kind::Linear;
  group.satisfaction_param = ScalarDist(0.25);
  group.offset_x0 = ScalarDist(0.0);
  group.no_rec_drift = ScalarDist(-1.2, -0.4);
  // With no reward feedback and no churn, total provider reward reduces to
  // the exposure total, which every always-recommending policy conserves.
  group.feedback_sensitivity = ScalarDist(0.0);
  group.creation_rate = ScalarDist(1.0);
  group.viability_threshold = ScalarDist(-1.0e6);
  scenario.config.provider_groups.push_back(group);
  return scenario;
}

Scenario make_subgroup_init() {
  Scenario scenario;
  scenario.family = ScenarioFamily::SubgroupInitSatisfaction;
  scenario.name = "subgroup_init";
  scenario.description =
      "Two provider groups identical except initial establishment: group A "
      "starts near the viability threshold, group B well above it.";
  scenario.config = common_skeleton();
  ProviderGroupConfig a = base_group("A", 5);
  a.satisfaction_kind = SatisfactionFn::Kind::SaturatedLog;
  a.satisfaction_param = ScalarDist(2.0);
  a.offset_x0 = ScalarDist(4.0);
  a.viability_threshold = ScalarDist(2.2);
  ProviderGroupConfig b = a;
  b.name = "B";
  b.offset_x0 = ScalarDist(12.0);
  scenario.config.provider_groups.push_back(a);
  scenario.config.provider_groups.push_back(b);
  return scenario;
}

Scenario make_subgroup_slope() {
  Scenario scenario;
  scenario.family = ScenarioFamily::SubgroupLinearSlope;
  scenario.name = "subgroup_slope";
  scenario.description =
      "Two linear provider groups identical except satisfaction slope: group "
      "B gains and loses satisfaction ten times faster than group A.";
  scenario.config = common_skeleton();
  ProviderGroupConfig a = base_group("A", 5);
  a.satisfaction_kind = SatisfactionFn::Kind::Linear;
  a.satisfaction_param = ScalarDist(0.05);
  a.offset_x0 = ScalarDist(0.0);
  // Feedback stays positive under typical exposure, so the faster group's
  // inventory growth leaves an observable signature; no churn, so
  // accumulated recommendation counts reflect policy preference alone.
  a.no_rec_drift = ScalarDist(-0.4);
  a.exposure_sensitivity = ScalarDist(0.2);
  a.feedback_sensitivity = ScalarDist(0.05);
  a.creation_rate = ScalarDist(4.0);
  a.viability_threshold = ScalarDist(-1.0e6);
  ProviderGroupConfig b = a;
  b.name = "B";
  b.satisfaction_param = ScalarDist(0.5);
  scenario.config.provider_groups.push_back(a);
  scenario.config.provider_groups.push_back(b);
  return scenario;
}

std::string file_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base.empty() ? "custom" : base;
}

}  // namespace

std::string family_name(ScenarioFamily family) {
  switch (family) {
    case ScenarioFamily::SaturatedLog: return "saturated_log";
    case ScenarioFamily::Linear: return "linear";
    case ScenarioFamily::SubgroupInitSatisfaction: return "subgroup_init_satisfaction";
    case ScenarioFamily::SubgroupLinearSlope: return "subgroup_linear_slope";
  }
  throw UsageError("unknown scenario family");
}

ScenarioFamily family_from_name(const std::string& name) {
  if (name == "saturated_log") return ScenarioFamily::SaturatedLog;
  if (name == "linear") return ScenarioFamily::Linear;
  if (name == "subgroup_init_satisfaction") return ScenarioFamily::SubgroupInitSatisfaction;
  if (name == "subgroup_linear_slope") return ScenarioFamily::SubgroupLinearSlope;
  throw ConfigError("unknown scenario family '" + name + "'");
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"saturated_log", "linear",
                                                 "subgroup_init", "subgroup_slope"};
  return names;
}

bool is_builtin_scenario(const std::string& name) {
  for (const auto& known : builtin_scenario_names()) {
    if (known == name) return true;
  }
  return false;
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "saturated_log") return make_saturated_log();
  if (name == "linear") return make_linear();
  if (name == "subgroup_init") return make_subgroup_init();
  if (name == "subgroup_slope") return make_subgroup_slope();
  std::string valid;
  for (const auto& known : builtin_scenario_names()) {
    if (!valid.empty()) valid += ", ";
    valid += known;
  }
  throw ConfigError("unknown scenario '" + name + "'; valid names: " + valid +
                    " (or a path to a scenario JSON file)");
}

Scenario load_scenario(const std::string& name_or_path) {
  if (is_builtin_scenario(name_or_path)) return builtin_scenario(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) {
    // Not a builtin and not a readable file: report both interpretations.
    return builtin_scenario(name_or_path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError("scenario file '" + name_or_path + "': " + err.what());
  }
  Scenario scenario;
  if (parsed.is_object() && parsed.contains("config")) {
    scenario = scenario_from_json(text.str());
    if (!parsed.contains("name")) scenario.name = file_stem(name_or_path);
  } else {
    scenario.config = core::config_from_json(text.str());
    scenario.family = classify(scenario.config);
    scenario.name = file_stem(name_or_path);
  }
  scenario.config.validate();
  return scenario;
}

std::string scenario_to_json(const Scenario& scenario, int indent) {
  nlohmann::json out;
  out["name"] = scenario.name;
  out["family"] = family_name(scenario.family);
  out["description"] = scenario.description;
  out["config"] = nlohmann::json::parse(core::to_json(scenario.config, 0));
  return out.dump(indent);
}

Scenario scenario_from_json(const std::string& json_text) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("scenario JSON: ") + err.what());
  }
  if (!parsed.is_object() || !parsed.contains("config")) {
    throw ConfigError("scenario JSON: missing 'config' object");
  }
  Scenario scenario;
  scenario.config = core::config_from_json(parsed.at("config").dump());
  if (parsed.contains("name")) scenario.name = parsed.at("name").get<std::string>();
  if (parsed.contains("description")) {
    scenario.description = parsed.at("description").get<std::string>();
  }
  if (parsed.contains("family")) {
    scenario.family = family_from_name(parsed.at("family").get<std::string>());
  } else {
    scenario.family = classify(scenario.config);
  }
  scenario.config.validate();
  return scenario;
}

}  // namespace ecosim::harness
