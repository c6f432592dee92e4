#pragma once

#include <string>
#include <vector>

#include "ecosim/tensor/tape.hpp"

namespace ecosim::tensor {

/// Block ids of one gated recurrent cell inside a ParameterStore.
struct GruParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int w_update = -1, b_update = -1;
  int w_reset = -1, b_reset = -1;
  int w_candidate = -1, b_candidate = -1;
};

GruParams make_gru(ParameterStore& store, const std::string& prefix,
                   int input_dim, int hidden_dim);

/// One recurrence step recorded on the tape; returns the h_next node.
int tape_gru_step(Tape& tape, const GruParams& gru, int x_node, int h_node);

/// Allocation-free plain forward for rollouts/evaluation.
struct GruWorkspace {
  std::vector<double> xh, z, r, xrh, n;
};

void gru_forward(const ParameterStore& store, const GruParams& gru,
                 std::span<const double> x, std::span<const double> h_prev,
                 GruWorkspace& ws, std::vector<double>& h_next);

/// Block ids of a dense stack; layer i maps dims[i] -> dims[i+1].
struct MlpParams {
  std::vector<int> weights;
  std::vector<int> biases;
  std::vector<Activation> activations;  // one per layer
  int input_dim = 0;
  int output_dim = 0;
};

/// hidden layers use `hidden_act`, the final layer `out_act`.
MlpParams make_mlp(ParameterStore& store, const std::string& prefix,
                   const std::vector<int>& dims, Activation hidden_act,
                   Activation out_act);

int tape_mlp(Tape& tape, const MlpParams& mlp, int x_node);

void mlp_forward(const ParameterStore& store, const MlpParams& mlp,
                 std::span<const double> x, std::vector<double>& out,
                 std::vector<double>& scratch);

}  // namespace ecosim::tensor
