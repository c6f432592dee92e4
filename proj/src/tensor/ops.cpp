#include "ecosim/tensor/ops.hpp"

#include <algorithm>
#include <cmath>

#include "ecosim/core/errors.hpp"

namespace ecosim::tensor {

namespace {

inline double apply_activation(Activation act, double v) {
  switch (act) {
    case Activation::ReLU: return v > 0.0 ? v : 0.0;
    case Activation::Tanh: return std::tanh(v);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-v));
    case Activation::Identity: return v;
  }
  return v;
}

}  // namespace

void dense_forward_into(const Tensor2D& weight, std::span<const double> bias,
                        Activation act, std::span<const double> x,
                        std::span<double> out) {
  if (static_cast<int>(x.size()) != weight.cols)
    throw ShapeError("dense_forward: input dim " + std::to_string(x.size()) +
                     " != weight cols " + std::to_string(weight.cols));
  if (static_cast<int>(bias.size()) != weight.rows ||
      static_cast<int>(out.size()) != weight.rows)
    throw ShapeError("dense_forward: bias/output dim != weight rows");
  const double* xp = x.data();
  for (int r = 0; r < weight.rows; ++r) {
    const double* wr = weight.row(r);
    double acc = bias[static_cast<std::size_t>(r)];
    for (int c = 0; c < weight.cols; ++c) acc += wr[c] * xp[c];
    out[static_cast<std::size_t>(r)] = apply_activation(act, acc);
  }
}

std::vector<double> dense_forward(const DenseLayer& layer,
                                  std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(layer.weight.rows));
  dense_forward_into(layer.weight, layer.bias, layer.activation, x, out);
  return out;
}

std::vector<double> cell_forward(const RecurrentCell& cell,
                                 std::span<const double> x,
                                 std::span<const double> h_prev) {
  if (static_cast<int>(x.size()) != cell.input_dim ||
      static_cast<int>(h_prev.size()) != cell.hidden_dim)
    throw ShapeError("cell_forward: input/hidden dim mismatch");
  const int h = cell.hidden_dim;
  std::vector<double> xh(x.begin(), x.end());
  xh.insert(xh.end(), h_prev.begin(), h_prev.end());

  std::vector<double> z(static_cast<std::size_t>(h)), r(static_cast<std::size_t>(h));
  dense_forward_into(cell.w_update, cell.b_update, Activation::Sigmoid, xh, z);
  dense_forward_into(cell.w_reset, cell.b_reset, Activation::Sigmoid, xh, r);

  std::vector<double> x_rh(x.begin(), x.end());
  for (int i = 0; i < h; ++i)
    x_rh.push_back(r[static_cast<std::size_t>(i)] * h_prev[static_cast<std::size_t>(i)]);
  std::vector<double> n(static_cast<std::size_t>(h));
  dense_forward_into(cell.w_candidate, cell.b_candidate, Activation::Tanh, x_rh, n);

  std::vector<double> h_next(static_cast<std::size_t>(h));
  for (int i = 0; i < h; ++i) {
    auto k = static_cast<std::size_t>(i);
    h_next[k] = z[k] * h_prev[k] + (1.0 - z[k]) * n[k];
  }
  return h_next;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw UsageError("softmax: temperature must be > 0");
  if (logits.empty()) throw UsageError("softmax: empty logits");
  double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - max_logit) / temperature);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

HuberResult huber_loss(double pred, double target, double delta) {
  if (!(delta > 0.0)) throw UsageError("huber_loss: delta must be > 0");
  double e = pred - target;
  if (std::abs(e) <= delta) return {0.5 * e * e, e};
  return {delta * (std::abs(e) - 0.5 * delta), e > 0.0 ? delta : -delta};
}

}  // namespace ecosim::tensor
