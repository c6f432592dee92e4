#pragma once

#include <string>
#include <vector>

#include "ecosim/core/config.hpp"

namespace ecosim::harness {

enum class ScenarioFamily {
  SaturatedLog,              // concave satisfaction, heterogeneous establishment
  Linear,                    // linear satisfaction, no viability cliff
  SubgroupInitSatisfaction,  // two groups identical except initial offset x0
  SubgroupLinearSlope,       // two linear groups identical except slope
};

std::string family_name(ScenarioFamily family);
ScenarioFamily family_from_name(const std::string& name);

/// A named, fully parameterized environment setup. The family only labels
/// which qualitative regime the config belongs to; all behavior comes from
/// the config itself.
struct Scenario {
  ScenarioFamily family = ScenarioFamily::SaturatedLog;
  std::string name = "custom";
  std::string description;
  core::EnvironmentConfig config;
};

const std::vector<std::string>& builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);

/// Throws ConfigError listing the valid names when `name` is unknown.
Scenario builtin_scenario(const std::string& name);

/// Accepts a builtin name or a path to a JSON file holding either a bare
/// environment config or the wrapped form produced by scenario_to_json.
Scenario load_scenario(const std::string& name_or_path);

std::string scenario_to_json(const Scenario& scenario, int indent = 2);
Scenario scenario_from_json(const std::string& json_text);

}  // namespace ecosim::harness
