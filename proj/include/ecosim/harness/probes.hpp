#pragma once

namespace ecosim::harness {

/// Result of the brute-force uplift additivity probe.
///
/// The probe rolls a deterministic two-provider environment from the same
/// initial state down three mutually exclusive branches for the single
/// user's first action (recommend provider 0's document, recommend provider
/// 1's document, recommend nothing) with no recommendations afterwards, and
/// compares per-provider discounted returns against the no-recommendation
/// branch.
struct AdditivityReport {
  /// Worst |sum_c dQ^c - dQ^rec| over the two recommendation branches.
  double max_additivity_error = 0.0;
  /// Worst |dQ^c| over providers that were not recommended in a branch.
  double max_cross_effect = 0.0;
  /// Smallest |dQ^rec| over the two recommendation branches; the probe is
  /// vacuous unless the recommendation actually moves the return.
  double min_uplift_magnitude = 0.0;

  bool pass(double tolerance) const {
    return max_additivity_error <= tolerance && max_cross_effect <= tolerance &&
           min_uplift_magnitude > tolerance;
  }
};

/// Runs the three-branch probe and reports how exactly one recommendation's
/// effect on total provider return decomposes onto the recommended provider.
AdditivityReport uplift_additivity_probe();

}  // namespace ecosim::harness
