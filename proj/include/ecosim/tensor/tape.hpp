#pragma once

#include <span>
#include <vector>

#include "ecosim/tensor/ops.hpp"
#include "ecosim/tensor/params.hpp"

namespace ecosim::tensor {

/// Reverse-mode execution record over a ParameterStore.
///
/// Forward calls append nodes and return node ids; values live in one flat
/// buffer so recording stays allocation-light. After seeding output
/// gradients, backward() runs a single reverse sweep and accumulates
/// parameter gradients into the store (caller controls zero_grads and any
/// averaging via the seed scale). reset() reuses the buffers for the next
/// record.
class Tape {
 public:
  explicit Tape(ParameterStore* store) : store_(store) {}

  void reset();

  int input(std::span<const double> values);
  int zeros(int dim);

  /// activation(W x + b) where W, b are store blocks.
  int dense(int w_block, int b_block, Activation act, int x);
  int concat(int a, int b);
  int hadamard(int a, int b);
  /// z.h + (1-z).n, elementwise (gated recurrence mix).
  int gate_mix(int z, int h, int n);
  /// scores[g] = <phi, embed_g> for every embedding node in embeds.
  int dots(int phi, std::span<const int> embeds);

  std::span<const double> value(int node) const;
  int dim(int node) const;

  void seed_gradient(int node, std::span<const double> g);
  void seed_gradient(int node, int index, double g);

  /// Reverse sweep over every recorded node. Requires at least one recorded
  /// node and runs at most once per record.
  void backward();

  int node_count() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op { Input, Dense, Concat, Hadamard, GateMix, Dots };

  struct Node {
    Op op;
    int offset;  // into vals_/grads_
    int dim;
    int a = -1, b = -1, c = -1;  // operand node ids
    int w_block = -1, b_block = -1;
    Activation act = Activation::Identity;
    int aux_offset = 0, aux_count = 0;  // operand list for Dots
  };

  int push_node(Node n);
  double* vals(const Node& n) { return vals_.data() + n.offset; }
  double* grads(const Node& n) { return grads_.data() + n.offset; }
  const double* vals(const Node& n) const { return vals_.data() + n.offset; }

  ParameterStore* store_;
  std::vector<Node> nodes_;
  std::vector<double> vals_;
  std::vector<double> grads_;
  std::vector<int> aux_;
  bool swept_ = false;
};

}  // namespace ecosim::tensor
