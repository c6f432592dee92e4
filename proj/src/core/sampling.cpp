#include "ecosim/core/sampling.hpp"

#include <algorithm>

#include "ecosim/core/errors.hpp"

namespace ecosim::core {

TopicVector sample_unit_preference(RngStream& rng, int k) {
  if (k < 2) throw ConfigError("sample_unit_preference: need k >= 2");
  TopicVector v(k);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (double& x : v.values) x = rng.next_gaussian();
    if (v.normalize()) return v;
  }
  // Practically unreachable; every component being ~0 simultaneously has
  // vanishing probability. Fall back to a fixed axis.
  return TopicVector::one_hot(k, 0);
}

double sample_truncated_normal(RngStream& rng, double mu, double sigma,
                               double lo, double hi) {
  if (sigma < 0.0) throw ConfigError("sample_truncated_normal: sigma < 0");
  if (lo > hi) throw ConfigError("sample_truncated_normal: empty interval");
  if (sigma == 0.0) return std::clamp(mu, lo, hi);
  constexpr int kMaxIterations = 1000;
  double x = mu;
  for (int i = 0; i < kMaxIterations; ++i) {
    x = mu + sigma * rng.next_gaussian();
    if (x >= lo && x <= hi) return x;
  }
  return std::clamp(x, lo, hi);
}

}  // namespace ecosim::core
