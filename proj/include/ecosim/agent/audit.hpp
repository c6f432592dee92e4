#pragma once

#include <cstdint>

#include "ecosim/tensor/fdcheck.hpp"

namespace ecosim::agent {

/// Audits the agent's three gradient accumulators (user utility, provider
/// utility, actor) against central differences of an independently
/// recomputed total loss on a small fabricated episode batch.
///
/// The seed controls both parameter initialization and the fabricated data,
/// so distinct seeds exercise distinct points of the loss surface.
tensor::FdReport audit_gradients(std::uint64_t seed);

}  // namespace ecosim::agent
