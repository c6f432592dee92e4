#include "ecosim/tensor/params.hpp"

#include <cmath>

#include "ecosim/core/errors.hpp"

namespace ecosim::tensor {

int ParameterStore::add(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ShapeError("ParameterStore::add: bad shape");
  ParamBlock b;
  b.name = std::move(name);
  b.value = Tensor2D(rows, cols);
  b.grad.assign(b.value.size(), 0.0);
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

void ParameterStore::zero_grads() {
  for (auto& b : blocks_) std::fill(b.grad.begin(), b.grad.end(), 0.0);
}

void ParameterStore::init_uniform(std::uint64_t seed) {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto& b = blocks_[i];
    double r = std::sqrt(6.0 / (b.value.rows + b.value.cols));
    core::RngStream rng(seed, "param_init", i);
    for (double& v : b.value.data) v = r * (2.0 * rng.next_double() - 1.0);
  }
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

bool ParameterStore::all_finite() const {
  for (const auto& b : blocks_)
    for (double v : b.value.data)
      if (!std::isfinite(v)) return false;
  return true;
}

void adagrad_step(AdagradState& state, int slot, std::span<double> params,
                  std::span<const double> grads) {
  if (params.size() != grads.size())
    throw ShapeError("adagrad_step: parameter/gradient size mismatch");
  if (state.accumulators.size() <= static_cast<std::size_t>(slot))
    state.accumulators.resize(static_cast<std::size_t>(slot) + 1);
  auto& acc = state.accumulators[static_cast<std::size_t>(slot)];
  if (acc.empty()) acc.assign(params.size(), 0.0);
  if (acc.size() != params.size())
    throw ShapeError("adagrad_step: accumulator size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    acc[i] += g * g;
    params[i] -= state.learning_rate * g / (std::sqrt(acc[i]) + state.epsilon);
  }
}

void adagrad_step(AdagradState& state, ParameterStore& store) {
  for (int i = 0; i < store.count(); ++i) {
    auto& b = store.block(i);
    adagrad_step(state, i, b.value.data, b.grad);
  }
}

}  // namespace ecosim::tensor
