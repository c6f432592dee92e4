#pragma once

#include <span>
#include <string>
#include <vector>

#include "ecosim/core/rng.hpp"
#include "ecosim/tensor/tensor.hpp"

namespace ecosim::tensor {

/// One named learnable tensor with its gradient accumulator.
struct ParamBlock {
  std::string name;
  Tensor2D value;
  std::vector<double> grad;  // same layout as value.data
};

/// Flat registry of every learnable tensor of a model. Blocks are addressed
/// by the integer id returned from add(); ids are stable for the lifetime of
/// the store.
class ParameterStore {
 public:
  int add(std::string name, int rows, int cols);

  ParamBlock& block(int id) { return blocks_[static_cast<std::size_t>(id)]; }
  const ParamBlock& block(int id) const {
    return blocks_[static_cast<std::size_t>(id)];
  }
  int count() const { return static_cast<int>(blocks_.size()); }

  void zero_grads();

  /// Glorot-style init: every entry uniform(-r, r), r = sqrt(6/(fan_in+fan_out))
  /// with fan_in = cols and fan_out = rows. Draws come from a stream keyed by
  /// the block id so the layout of unrelated blocks cannot shift values.
  void init_uniform(std::uint64_t seed);

  std::size_t parameter_count() const;
  bool all_finite() const;

 private:
  std::vector<ParamBlock> blocks_;
};

/// Adagrad: acc += g^2; theta <- theta - lr * g / (sqrt(acc) + eps).
struct AdagradState {
  double learning_rate = 0.01;
  double epsilon = 1e-8;
  std::vector<std::vector<double>> accumulators;  // one slot per block

  explicit AdagradState(double lr = 0.01) : learning_rate(lr) {}
};

/// Elementwise update of a single tensor; grows no state beyond acc.
void adagrad_step(AdagradState& state, int slot, std::span<double> params,
                  std::span<const double> grads);

/// Applies adagrad to every block of the store using its current gradients.
void adagrad_step(AdagradState& state, ParameterStore& store);

}  // namespace ecosim::tensor
