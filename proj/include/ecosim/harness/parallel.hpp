#pragma once

#include <functional>

namespace ecosim::harness {

/// Runs fn(0), ..., fn(n-1), striding the indices across `threads` workers
/// when threads > 1. Each call must write only to its own output slot; with
/// that discipline results are identical for any thread count. The first
/// exception (by index) is rethrown after all workers join.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace ecosim::harness
