#include "ecosim/tensor/models.hpp"

#include "ecosim/core/errors.hpp"

namespace ecosim::tensor {

GruParams make_gru(ParameterStore& store, const std::string& prefix,
                   int input_dim, int hidden_dim) {
  GruParams g;
  g.input_dim = input_dim;
  g.hidden_dim = hidden_dim;
  int xh = input_dim + hidden_dim;
  g.w_update = store.add(prefix + ".w_update", hidden_dim, xh);
  g.b_update = store.add(prefix + ".b_update", hidden_dim, 1);
  g.w_reset = store.add(prefix + ".w_reset", hidden_dim, xh);
  g.b_reset = store.add(prefix + ".b_reset", hidden_dim, 1);
  g.w_candidate = store.add(prefix + ".w_candidate", hidden_dim, xh);
  g.b_candidate = store.add(prefix + ".b_candidate", hidden_dim, 1);
  return g;
}

int tape_gru_step(Tape& tape, const GruParams& gru, int x_node, int h_node) {
  int xh = tape.concat(x_node, h_node);
  int z = tape.dense(gru.w_update, gru.b_update, Activation::Sigmoid, xh);
  int r = tape.dense(gru.w_reset, gru.b_reset, Activation::Sigmoid, xh);
  int rh = tape.hadamard(r, h_node);
  int xrh = tape.concat(x_node, rh);
  int n = tape.dense(gru.w_candidate, gru.b_candidate, Activation::Tanh, xrh);
  return tape.gate_mix(z, h_node, n);
}

void gru_forward(const ParameterStore& store, const GruParams& gru,
                 std::span<const double> x, std::span<const double> h_prev,
                 GruWorkspace& ws, std::vector<double>& h_next) {
  if (static_cast<int>(x.size()) != gru.input_dim ||
      static_cast<int>(h_prev.size()) != gru.hidden_dim)
    throw ShapeError("gru_forward: dim mismatch");
  const int h = gru.hidden_dim;
  ws.xh.assign(x.begin(), x.end());
  ws.xh.insert(ws.xh.end(), h_prev.begin(), h_prev.end());
  ws.z.resize(static_cast<std::size_t>(h));
  ws.r.resize(static_cast<std::size_t>(h));
  ws.n.resize(static_cast<std::size_t>(h));
  dense_forward_into(store.block(gru.w_update).value,
                     store.block(gru.b_update).value.data, Activation::Sigmoid,
                     ws.xh, ws.z);
  dense_forward_into(store.block(gru.w_reset).value,
                     store.block(gru.b_reset).value.data, Activation::Sigmoid,
                     ws.xh, ws.r);
  ws.xrh.assign(x.begin(), x.end());
  for (int i = 0; i < h; ++i)
    ws.xrh.push_back(ws.r[static_cast<std::size_t>(i)] *
                     h_prev[static_cast<std::size_t>(i)]);
  dense_forward_into(store.block(gru.w_candidate).value,
                     store.block(gru.b_candidate).value.data, Activation::Tanh,
                     ws.xrh, ws.n);
  h_next.resize(static_cast<std::size_t>(h));
  for (int i = 0; i < h; ++i) {
    auto k = static_cast<std::size_t>(i);
    h_next[k] = ws.z[k] * h_prev[k] + (1.0 - ws.z[k]) * ws.n[k];
  }
}

MlpParams make_mlp(ParameterStore& store, const std::string& prefix,
                   const std::vector<int>& dims, Activation hidden_act,
                   Activation out_act) {
  if (dims.size() < 2) throw ShapeError("make_mlp: need at least two dims");
  MlpParams m;
  m.input_dim = dims.front();
  m.output_dim = dims.back();
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    std::string layer = prefix + ".l" + std::to_string(i);
    m.weights.push_back(store.add(layer + ".w", dims[i + 1], dims[i]));
    m.biases.push_back(store.add(layer + ".b", dims[i + 1], 1));
    m.activations.push_back(i + 2 < dims.size() ? hidden_act : out_act);
  }
  return m;
}

int tape_mlp(Tape& tape, const MlpParams& mlp, int x_node) {
  int node = x_node;
  for (std::size_t i = 0; i < mlp.weights.size(); ++i)
    node = tape.dense(mlp.weights[i], mlp.biases[i], mlp.activations[i], node);
  return node;
}

void mlp_forward(const ParameterStore& store, const MlpParams& mlp,
                 std::span<const double> x, std::vector<double>& out,
                 std::vector<double>& scratch) {
  scratch.assign(x.begin(), x.end());
  for (std::size_t i = 0; i < mlp.weights.size(); ++i) {
    const auto& w = store.block(mlp.weights[i]).value;
    out.resize(static_cast<std::size_t>(w.rows));
    dense_forward_into(w, store.block(mlp.biases[i]).value.data,
                       mlp.activations[i], scratch, out);
    scratch = out;
  }
  if (mlp.weights.empty()) out = scratch;
}

}  // namespace ecosim::tensor
