#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecosim/core/rng.hpp"
#include "ecosim/core/types.hpp"

namespace ecosim::core {

/// A scalar drawn anew for each entity at reset. Serialized either as a bare
/// number (constant) or as {"lo": a, "hi": b} (uniform on [a, b]).
struct ScalarDist {
  double lo = 0.0;
  double hi = 0.0;

  ScalarDist() = default;
  ScalarDist(double value) : lo(value), hi(value) {}  // NOLINT: implicit by design
  ScalarDist(double lo_, double hi_) : lo(lo_), hi(hi_) {}

  bool is_constant() const { return lo == hi; }
  double sample(RngStream& rng) const {
    return is_constant() ? lo : lo + (hi - lo) * rng.next_double();
  }
};

struct UserParamConfig {
  ScalarDist quality_sensitivity{0.5};  // in [0, 1]
  ScalarDist preference_drift{0.1};     // >= 0
};

/// Parameterization of one provider group; every provider in the group is
/// drawn from these distributions at reset.
struct ProviderGroupConfig {
  std::string name = "A";
  int size = 0;
  ScalarDist no_rec_drift{-0.5};         // < 0
  ScalarDist exposure_sensitivity{0.1};  // >= 0
  ScalarDist feedback_sensitivity{0.1};  // >= 0
  ScalarDist preference_drift{0.05};     // >= 0
  ScalarDist creation_rate{1.0};         // >= 0
  ScalarDist quality_mean{0.0};
  ScalarDist quality_std{0.1};           // >= 0
  ScalarDist viability_threshold{-10.0};
  SatisfactionFn::Kind satisfaction_kind = SatisfactionFn::Kind::SaturatedLog;
  ScalarDist satisfaction_param{1.0};    // slope or scale; > 0
  ScalarDist offset_x0{0.0};
};

struct EnvironmentConfig {
  int num_topics = 10;
  int num_users = 50;
  int num_providers = 10;
  int initial_docs_per_provider = 20;
  int horizon = 20;
  UserParamConfig user_params;
  std::vector<ProviderGroupConfig> provider_groups;
  double gamma_user = 0.99;
  double gamma_provider = 0.99;
  std::uint64_t master_seed = 0;

  /// Throws ConfigError naming the offending field when any invariant fails
  /// (group sizes must sum to num_providers, horizon >= 1, K >= 2, parameter
  /// ranges as documented on each field).
  void validate() const;
};

/// JSON round-trip. Field names match the struct members; unknown fields are
/// rejected so that typos cannot silently fall back to defaults.
std::string to_json(const EnvironmentConfig& config, int indent = 2);
EnvironmentConfig config_from_json(const std::string& json_text);
EnvironmentConfig load_config_file(const std::string& path);
void save_config_file(const EnvironmentConfig& config, const std::string& path);

}  // namespace ecosim::core
