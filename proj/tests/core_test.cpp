#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "ecosim/core/config.hpp"
#include "ecosim/core/errors.hpp"
#include "ecosim/core/rng.hpp"
#include "ecosim/core/sampling.hpp"
#include "ecosim/core/types.hpp"

using namespace ecosim;
using namespace ecosim::core;

TEST_CASE("rng streams are pure functions of (seed, tag, id, step)") {
  RngStream a(42, "user_reward", 7, 3);
  RngStream b(42, "user_reward", 7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, "user_reward", 7, 4);
  RngStream d(42, "doc_topic", 7, 3);
  RngStream e(43, "user_reward", 7, 3);
  RngStream base(42, "user_reward", 7, 3);
  std::uint64_t first = base.next_u64();
  CHECK(c.next_u64() != first);
  CHECK(d.next_u64() != first);
  CHECK(e.next_u64() != first);
}

TEST_CASE("uniform doubles stay in [0,1) and cover the range") {
  RngStream rng(1, "uniform_test");
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("gaussian draws have standard moments") {
  RngStream rng(9, "gaussian_test");
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("next_below is uniform over small ranges") {
  RngStream rng(5, "below_test");
  int counts[7] = {0};
  for (int i = 0; i < 70000; ++i) counts[rng.next_below(7)]++;
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS_AS(rng.next_below(0), UsageError);
}

TEST_CASE("sample_categorical follows the given weights") {
  RngStream rng(11, "cat_test");
  std::vector<double> probs = {0.2, 0.0, 0.5, 0.3};
  int counts[4] = {0};
  for (int i = 0; i < 40000; ++i) counts[rng.sample_categorical(probs)]++;
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] - 8000) < 500);
  CHECK(std::abs(counts[2] - 20000) < 700);
  CHECK(std::abs(counts[3] - 12000) < 600);
  CHECK_THROWS_AS(rng.sample_categorical({}), UsageError);
  CHECK_THROWS_AS(rng.sample_categorical({0.0, 0.0}), UsageError);
  CHECK_THROWS_AS(rng.sample_categorical({0.5, -0.1}), UsageError);
}

TEST_CASE("unit preference sampling") {
  SUBCASE("unit norm forced") {
    RngStream rng(3, "pref");
    for (int i = 0; i < 50; ++i) {
      TopicVector v = sample_unit_preference(rng, 3);
      CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    }
  }
  SUBCASE("determinism across identical streams") {
    RngStream a(77, "pref", 4, 2);
    RngStream b(77, "pref", 4, 2);
    TopicVector va = sample_unit_preference(a, 6);
    TopicVector vb = sample_unit_preference(b, 6);
    for (int i = 0; i < 6; ++i) CHECK(va.values[i] == vb.values[i]);
  }
  SUBCASE("isotropy: coordinate means vanish") {
    RngStream rng(123, "pref_iso");
    double mean[2] = {0.0, 0.0};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      TopicVector v = sample_unit_preference(rng, 2);
      mean[0] += v.values[0];
      mean[1] += v.values[1];
    }
    CHECK(std::abs(mean[0] / n) < 0.05);
    CHECK(std::abs(mean[1] / n) < 0.05);
  }
  SUBCASE("K < 2 rejected") {
    RngStream rng(1, "pref_bad");
    CHECK_THROWS_AS(sample_unit_preference(rng, 1), ConfigError);
  }
}

TEST_CASE("truncated normal sampling") {
  SUBCASE("sigma zero degenerates to clamp") {
    RngStream rng(1, "tn");
    CHECK(sample_truncated_normal(rng, 0.0, 0.0, -1.0, 1.0) == 0.0);
    CHECK(sample_truncated_normal(rng, 5.0, 0.0, -1.0, 1.0) == 1.0);
    CHECK(sample_truncated_normal(rng, -5.0, 0.0, -1.0, 1.0) == -1.0);
  }
  SUBCASE("all draws inside the interval") {
    RngStream rng(2, "tn_range");
    for (int i = 0; i < 20000; ++i) {
      double x = sample_truncated_normal(rng, 0.9, 0.5, -1.0, 1.0);
      CHECK(x >= -1.0);
      CHECK(x <= 1.0);
    }
  }
  SUBCASE("mean matches the untruncated normal when truncation is negligible") {
    RngStream rng(3, "tn_mean");
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
      sum += sample_truncated_normal(rng, 0.8, 0.1, -1.0, 1.0);
    CHECK(std::abs(sum / n - 0.8) < 0.01);
  }
  SUBCASE("invalid parameters rejected") {
    RngStream rng(4, "tn_bad");
    CHECK_THROWS_AS(sample_truncated_normal(rng, 0, -0.1, -1, 1), ConfigError);
    CHECK_THROWS_AS(sample_truncated_normal(rng, 0, 0.1, 1, -1), ConfigError);
  }
}

TEST_CASE("satisfaction function values") {
  SatisfactionFn linear{SatisfactionFn::Kind::Linear, 2.0, 0.0};
  CHECK(satisfaction_value(linear, 3.0) == doctest::Approx(6.0).epsilon(1e-12));

  SatisfactionFn satlog{SatisfactionFn::Kind::SaturatedLog, 1.0, 0.0};
  CHECK(satisfaction_value(satlog, 0.0) == 0.0);
  CHECK(satisfaction_value(satlog, -0.5) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("satisfaction function shape properties") {
  SatisfactionFn fns[] = {
      {SatisfactionFn::Kind::Linear, 0.7, 3.0},
      {SatisfactionFn::Kind::SaturatedLog, 2.5, 1.5},
      {SatisfactionFn::Kind::SaturatedLog, 1.0, -2.0},
  };
  SUBCASE("monotone nondecreasing on a grid") {
    for (const auto& f : fns) {
      double prev = f(-50.0);
      for (double x = -49.9; x <= 50.0; x += 0.1) {
        double cur = f(x);
        CHECK(cur >= prev);
        prev = cur;
      }
    }
  }
  SUBCASE("log branch has strictly decreasing increments") {
    SatisfactionFn f{SatisfactionFn::Kind::SaturatedLog, 2.0, 0.0};
    const double delta = 0.5;
    double prev_gain = f(0.0 + delta) - f(0.0);
    for (double x = 0.25; x < 30.0; x += 0.25) {
      double gain = f(x + delta) - f(x);
      CHECK(gain < prev_gain);
      prev_gain = gain;
    }
  }
  SUBCASE("branches join continuously with matched slope") {
    SatisfactionFn f{SatisfactionFn::Kind::SaturatedLog, 3.0, 1.0};
    const double x_join = -1.0;  // shifted argument hits zero here
    double eps = 1e-7;
    CHECK(std::abs(f(x_join + eps) - f(x_join - eps)) < 1e-6);
    double slope_above = (f(x_join + 2 * eps) - f(x_join + eps)) / eps;
    double slope_below = (f(x_join - eps) - f(x_join - 2 * eps)) / eps;
    CHECK(slope_above == doctest::Approx(slope_below).epsilon(1e-3));
  }
}

TEST_CASE("environment config validation") {
  EnvironmentConfig c;
  c.provider_groups.resize(1);
  c.provider_groups[0].size = c.num_providers;
  CHECK_NOTHROW(c.validate());

  SUBCASE("group sizes must sum to num_providers") {
    c.provider_groups[0].size = c.num_providers - 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("K >= 2") {
    c.num_topics = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("horizon >= 1") {
    c.horizon = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("no_rec_drift must stay negative") {
    c.provider_groups[0].no_rec_drift = ScalarDist(0.0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("quality_sensitivity bounded by [0,1]") {
    c.user_params.quality_sensitivity = ScalarDist(0.2, 1.3);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("satisfaction_param must be positive") {
    c.provider_groups[0].satisfaction_param = ScalarDist(0.0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_CASE("environment config JSON round trip") {
  EnvironmentConfig c;
  c.num_topics = 5;
  c.num_users = 12;
  c.num_providers = 4;
  c.initial_docs_per_provider = 7;
  c.horizon = 9;
  c.gamma_user = 0.95;
  c.gamma_provider = 0.9;
  c.master_seed = 987654321;
  c.user_params.quality_sensitivity = ScalarDist(0.1, 0.9);
  c.user_params.preference_drift = ScalarDist(0.25);
  ProviderGroupConfig a;
  a.name = "A";
  a.size = 3;
  a.no_rec_drift = ScalarDist(-0.9, -0.3);
  a.satisfaction_kind = SatisfactionFn::Kind::SaturatedLog;
  a.satisfaction_param = ScalarDist(2.0);
  a.offset_x0 = ScalarDist(4.0, 20.0);
  ProviderGroupConfig b = a;
  b.name = "B";
  b.size = 1;
  b.satisfaction_kind = SatisfactionFn::Kind::Linear;
  b.satisfaction_param = ScalarDist(0.25);
  c.provider_groups = {a, b};

  std::string text = to_json(c);
  EnvironmentConfig back = config_from_json(text);
  CHECK(back.num_topics == c.num_topics);
  CHECK(back.num_users == c.num_users);
  CHECK(back.num_providers == c.num_providers);
  CHECK(back.initial_docs_per_provider == c.initial_docs_per_provider);
  CHECK(back.horizon == c.horizon);
  CHECK(back.gamma_user == c.gamma_user);
  CHECK(back.gamma_provider == c.gamma_provider);
  CHECK(back.master_seed == c.master_seed);
  CHECK(back.user_params.quality_sensitivity.lo == 0.1);
  CHECK(back.user_params.quality_sensitivity.hi == 0.9);
  REQUIRE(back.provider_groups.size() == 2);
  CHECK(back.provider_groups[0].name == "A");
  CHECK(back.provider_groups[0].offset_x0.lo == 4.0);
  CHECK(back.provider_groups[0].offset_x0.hi == 20.0);
  CHECK(back.provider_groups[1].satisfaction_kind == SatisfactionFn::Kind::Linear);
  CHECK(back.provider_groups[1].satisfaction_param.lo == 0.25);

  // Round trip is textually stable once normalised through to_json.
  CHECK(to_json(back) == text);
}

TEST_CASE("environment config JSON rejects unknown and malformed fields") {
  EnvironmentConfig c;
  c.provider_groups.resize(1);
  c.provider_groups[0].size = c.num_providers;
  std::string text = to_json(c);

  CHECK_THROWS_AS(config_from_json("{ not json"), ConfigError);

  std::string with_unknown = text;
  with_unknown.insert(1, "\"num_topcs\": 10,");
  CHECK_THROWS_AS(config_from_json(with_unknown), ConfigError);

  // Unknown field nested inside a provider group.
  std::string group_unknown = text;
  auto pos = group_unknown.find("\"creation_rate\"");
  REQUIRE(pos != std::string::npos);
  group_unknown.insert(pos, "\"creation_rte\": 1.0, ");
  CHECK_THROWS_AS(config_from_json(group_unknown), ConfigError);

  CHECK_THROWS_AS(config_from_json("{}"), ConfigError);
}

TEST_CASE("fnv1a64 matches reference digests") {
  // Reference values from the published FNV-1a test vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}
