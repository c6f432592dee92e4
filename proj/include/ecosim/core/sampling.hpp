#pragma once

#include "ecosim/core/rng.hpp"
#include "ecosim/core/types.hpp"

namespace ecosim::core {

/// Uniform direction on the unit sphere in R^k (gaussian draw, normalised).
/// Requires k >= 2. The degenerate all-zero draw is resampled.
TopicVector sample_unit_preference(RngStream& rng, int k);

/// Normal(mu, sigma) conditioned on [lo, hi], sampled by rejection.
/// sigma == 0 degenerates to clamp(mu, lo, hi). After an iteration cap the
/// draw falls back to clamping a plain gaussian sample, keeping the
/// postcondition lo <= x <= hi unconditionally.
double sample_truncated_normal(RngStream& rng, double mu, double sigma,
                               double lo, double hi);

}  // namespace ecosim::core
