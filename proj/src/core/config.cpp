#include "ecosim/core/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecosim/core/errors.hpp"

namespace ecosim::core {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

json dist_to_json(const ScalarDist& d) {
  if (d.is_constant()) return json(d.lo);
  return json{{"lo", d.lo}, {"hi", d.hi}};
}

ScalarDist dist_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return ScalarDist(j.get<double>());
  require_keys(j, {"lo", "hi"}, where);
  if (!j.contains("lo") || !j.contains("hi"))
    throw ConfigError(where + ": range needs both 'lo' and 'hi'");
  ScalarDist d(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (d.lo > d.hi) throw ConfigError(where + ": lo > hi");
  return d;
}

std::string kind_name(SatisfactionFn::Kind kind) {
  return kind == SatisfactionFn::Kind::Linear ? "Linear" : "SaturatedLog";
}

SatisfactionFn::Kind kind_from_name(const std::string& name, const std::string& where) {
  if (name == "Linear") return SatisfactionFn::Kind::Linear;
  if (name == "SaturatedLog") return SatisfactionFn::Kind::SaturatedLog;
  throw ConfigError(where + ": unknown satisfaction kind '" + name + "'");
}

json group_to_json(const ProviderGroupConfig& g) {
  json j;
  j["name"] = g.name;
  j["size"] = g.size;
  j["no_rec_drift"] = dist_to_json(g.no_rec_drift);
  j["exposure_sensitivity"] = dist_to_json(g.exposure_sensitivity);
  j["feedback_sensitivity"] = dist_to_json(g.feedback_sensitivity);
  j["preference_drift"] = dist_to_json(g.preference_drift);
  j["creation_rate"] = dist_to_json(g.creation_rate);
  j["quality_mean"] = dist_to_json(g.quality_mean);
  j["quality_std"] = dist_to_json(g.quality_std);
  j["viability_threshold"] = dist_to_json(g.viability_threshold);
  j["satisfaction_kind"] = kind_name(g.satisfaction_kind);
  j["satisfaction_param"] = dist_to_json(g.satisfaction_param);
  j["offset_x0"] = dist_to_json(g.offset_x0);
  return j;
}

ProviderGroupConfig group_from_json(const json& j, const std::string& where) {
  require_keys(j, {"name", "size", "no_rec_drift", "exposure_sensitivity",
                   "feedback_sensitivity", "preference_drift", "creation_rate",
                   "quality_mean", "quality_std", "viability_threshold",
                   "satisfaction_kind", "satisfaction_param", "offset_x0"},
               where);
  ProviderGroupConfig g;
  if (j.contains("name")) g.name = j.at("name").get<std::string>();
  if (!j.contains("size")) throw ConfigError(where + ": missing 'size'");
  g.size = j.at("size").get<int>();
  auto get = [&](const char* key, ScalarDist& out) {
    if (j.contains(key)) out = dist_from_json(j.at(key), where + "." + key);
  };
  get("no_rec_drift", g.no_rec_drift);
  get("exposure_sensitivity", g.exposure_sensitivity);
  get("feedback_sensitivity", g.feedback_sensitivity);
  get("preference_drift", g.preference_drift);
  get("creation_rate", g.creation_rate);
  get("quality_mean", g.quality_mean);
  get("quality_std", g.quality_std);
  get("viability_threshold", g.viability_threshold);
  get("satisfaction_param", g.satisfaction_param);
  get("offset_x0", g.offset_x0);
  if (j.contains("satisfaction_kind"))
    g.satisfaction_kind =
        kind_from_name(j.at("satisfaction_kind").get<std::string>(), where);
  return g;
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_dist(const ScalarDist& d, double lo, double hi, bool lo_strict,
                bool hi_strict, const std::string& field) {
  bool ok_lo = lo_strict ? d.lo > lo : d.lo >= lo;
  bool ok_hi = hi_strict ? d.hi < hi : d.hi <= hi;
  check(ok_lo && ok_hi && d.lo <= d.hi, "config: " + field + " out of range");
}

}  // namespace

void EnvironmentConfig::validate() const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  check(num_topics >= 2, "config: num_topics must be >= 2");
  check(num_users >= 1, "config: num_users must be >= 1");
  check(num_providers >= 1, "config: num_providers must be >= 1");
  check(initial_docs_per_provider >= 1,
        "config: initial_docs_per_provider must be >= 1");
  check(horizon >= 1, "config: horizon must be >= 1");
  check(gamma_user >= 0.0 && gamma_user <= 1.0, "config: gamma_user outside [0,1]");
  check(gamma_provider >= 0.0 && gamma_provider <= 1.0,
        "config: gamma_provider outside [0,1]");
  check_dist(user_params.quality_sensitivity, 0.0, 1.0, false, false,
             "user_params.quality_sensitivity");
  check_dist(user_params.preference_drift, 0.0, kInf, false, false,
             "user_params.preference_drift");
  check(!provider_groups.empty(), "config: provider_groups must be nonempty");
  int total = 0;
  for (std::size_t i = 0; i < provider_groups.size(); ++i) {
    const auto& g = provider_groups[i];
    std::string where = "provider_groups[" + std::to_string(i) + "].";
    check(g.size >= 1, "config: " + where + "size must be >= 1");
    total += g.size;
    check_dist(g.no_rec_drift, -kInf, 0.0, false, true, where + "no_rec_drift");
    check_dist(g.exposure_sensitivity, 0.0, kInf, false, false,
               where + "exposure_sensitivity");
    check_dist(g.feedback_sensitivity, 0.0, kInf, false, false,
               where + "feedback_sensitivity");
    check_dist(g.preference_drift, 0.0, kInf, false, false,
               where + "preference_drift");
    check_dist(g.creation_rate, 0.0, kInf, false, false, where + "creation_rate");
    check_dist(g.quality_mean, -1.0, 1.0, false, false, where + "quality_mean");
    check_dist(g.quality_std, 0.0, kInf, false, false, where + "quality_std");
    check_dist(g.satisfaction_param, 0.0, kInf, true, false,
               where + "satisfaction_param");
  }
  check(total == num_providers,
        "config: provider group sizes sum to " + std::to_string(total) +
            ", expected num_providers = " + std::to_string(num_providers));
}

std::string to_json(const EnvironmentConfig& config, int indent) {
  json j;
  j["num_topics"] = config.num_topics;
  j["num_users"] = config.num_users;
  j["num_providers"] = config.num_providers;
  j["initial_docs_per_provider"] = config.initial_docs_per_provider;
  j["horizon"] = config.horizon;
  j["user_params"] = {
      {"quality_sensitivity", dist_to_json(config.user_params.quality_sensitivity)},
      {"preference_drift", dist_to_json(config.user_params.preference_drift)}};
  j["provider_groups"] = json::array();
  for (const auto& g : config.provider_groups)
    j["provider_groups"].push_back(group_to_json(g));
  j["gamma_user"] = config.gamma_user;
  j["gamma_provider"] = config.gamma_provider;
  j["master_seed"] = config.master_seed;
  return j.dump(indent);
}

EnvironmentConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  require_keys(j, {"num_topics", "num_users", "num_providers",
                   "initial_docs_per_provider", "horizon", "user_params",
                   "provider_groups", "gamma_user", "gamma_provider",
                   "master_seed"},
               "config");
  EnvironmentConfig c;
  auto get_int = [&](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
  };
  get_int("num_topics", c.num_topics);
  get_int("num_users", c.num_users);
  get_int("num_providers", c.num_providers);
  get_int("initial_docs_per_provider", c.initial_docs_per_provider);
  get_int("horizon", c.horizon);
  if (j.contains("gamma_user")) c.gamma_user = j.at("gamma_user").get<double>();
  if (j.contains("gamma_provider"))
    c.gamma_provider = j.at("gamma_provider").get<double>();
  if (j.contains("master_seed"))
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("user_params")) {
    const json& u = j.at("user_params");
    require_keys(u, {"quality_sensitivity", "preference_drift"}, "user_params");
    if (u.contains("quality_sensitivity"))
      c.user_params.quality_sensitivity =
          dist_from_json(u.at("quality_sensitivity"), "user_params.quality_sensitivity");
    if (u.contains("preference_drift"))
      c.user_params.preference_drift =
          dist_from_json(u.at("preference_drift"), "user_params.preference_drift");
  }
  if (!j.contains("provider_groups"))
    throw ConfigError("config: missing 'provider_groups'");
  c.provider_groups.clear();
  const json& groups = j.at("provider_groups");
  if (!groups.is_array()) throw ConfigError("config: provider_groups must be an array");
  for (std::size_t i = 0; i < groups.size(); ++i)
    c.provider_groups.push_back(group_from_json(
        groups[i], "provider_groups[" + std::to_string(i) + "]"));
  c.validate();
  return c;
}

EnvironmentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config_file(const EnvironmentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write '" + path + "'");
  out << to_json(config) << "\n";
}

}  // namespace ecosim::core
