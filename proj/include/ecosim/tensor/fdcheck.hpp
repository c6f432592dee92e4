#pragma once

#include <functional>
#include <string>

#include "ecosim/tensor/params.hpp"

namespace ecosim::tensor {

struct FdReport {
  double max_rel_err = 0.0;
  std::string worst_block;
  int worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int checked = 0;

  bool pass(double tolerance) const { return max_rel_err < tolerance; }
};

struct FdOptions {
  double step = 1e-5;  // central-difference half-width
  /// Check at most this many entries per block (deterministic stride
  /// subsample); 0 checks every entry.
  int max_checks_per_block = 0;
  /// Relative-error denominator floor. Entries where analytic and numeric
  /// are both below the floor compare through it, so true-zero gradients do
  /// not divide central-difference roundoff by a vanishing denominator.
  double denom_floor = 1e-8;
};

/// Central-difference audit of reverse-mode gradients.
///
/// loss_fn evaluates the scalar loss from the current parameters without
/// touching gradients; grad_fn recomputes the loss's analytic gradients into
/// the store (it must zero them itself). Relative error uses denominator
/// max(|analytic|, |numeric|, 1e-8).
FdReport finite_difference_check(ParameterStore& store,
                                 const std::function<double()>& loss_fn,
                                 const std::function<void()>& grad_fn,
                                 const FdOptions& options = {});

}  // namespace ecosim::tensor
