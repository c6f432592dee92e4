#pragma once

#include <span>
#include <vector>

#include "ecosim/tensor/tensor.hpp"

namespace ecosim::tensor {

enum class Activation { ReLU, Tanh, Identity, Sigmoid };

struct DenseLayer {
  Tensor2D weight;           // out_dim x in_dim
  std::vector<double> bias;  // out_dim
  Activation activation = Activation::Identity;
};

/// out = activation(W x + b). Low-level form used by the models; out must
/// have weight.rows entries and must not alias x.
void dense_forward_into(const Tensor2D& weight, std::span<const double> bias,
                        Activation act, std::span<const double> x,
                        std::span<double> out);

std::vector<double> dense_forward(const DenseLayer& layer,
                                  std::span<const double> x);

/// Gated recurrent cell, three gates:
///   z = sigmoid(Wz [x;h] + bz)      update
///   r = sigmoid(Wr [x;h] + br)      reset
///   n = tanh(Wn [x; r.h] + bn)      candidate
///   h' = z.h + (1-z).n
/// Weights are hidden x (input+hidden). h' entries stay in (-1, 1) when the
/// initial hidden state is zero.
struct RecurrentCell {
  int input_dim = 0;
  int hidden_dim = 0;
  Tensor2D w_update, w_reset, w_candidate;
  std::vector<double> b_update, b_reset, b_candidate;
};

std::vector<double> cell_forward(const RecurrentCell& cell,
                                 std::span<const double> x,
                                 std::span<const double> h_prev);

/// Numerically stable softmax with temperature.
std::vector<double> softmax(std::span<const double> logits, double temperature);

struct HuberResult {
  double loss = 0.0;
  double dpred = 0.0;  // d loss / d pred
};

/// 0.5 e^2 for |e| <= delta, delta(|e| - 0.5 delta) otherwise, e = pred - target.
HuberResult huber_loss(double pred, double target, double delta = 1.0);

}  // namespace ecosim::tensor
