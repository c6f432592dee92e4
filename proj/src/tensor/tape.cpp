#include "ecosim/tensor/tape.hpp"

#include <algorithm>
#include <cmath>

#include "ecosim/core/errors.hpp"

namespace ecosim::tensor {

// push_node may reallocate nodes_ and vals_; forward implementations below
// only hold plain indices/dims across it, never references or pointers.

void Tape::reset() {
  nodes_.clear();
  vals_.clear();
  grads_.clear();
  aux_.clear();
  swept_ = false;
}

int Tape::push_node(Node n) {
  n.offset = static_cast<int>(vals_.size());
  vals_.resize(vals_.size() + static_cast<std::size_t>(n.dim), 0.0);
  grads_.resize(vals_.size(), 0.0);
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(std::span<const double> values) {
  Node n{Op::Input, 0, static_cast<int>(values.size())};
  int id = push_node(n);
  std::copy(values.begin(), values.end(), vals(nodes_[static_cast<std::size_t>(id)]));
  return id;
}

int Tape::zeros(int dim) {
  return push_node(Node{Op::Input, 0, dim});
}

int Tape::dense(int w_block, int b_block, Activation act, int x) {
  const auto& w = store_->block(w_block).value;
  const auto& b = store_->block(b_block).value;
  if (nodes_[static_cast<std::size_t>(x)].dim != w.cols)
    throw ShapeError("Tape::dense: input dim != weight cols");
  if (b.rows != w.rows || b.cols != 1)
    throw ShapeError("Tape::dense: bias shape != (rows, 1)");
  Node n{Op::Dense, 0, w.rows};
  n.a = x;
  n.w_block = w_block;
  n.b_block = b_block;
  n.act = act;
  int id = push_node(n);
  const double* xv = vals(nodes_[static_cast<std::size_t>(x)]);
  double* out = vals(nodes_[static_cast<std::size_t>(id)]);
  dense_forward_into(w, b.data, act,
                     std::span<const double>(xv, static_cast<std::size_t>(w.cols)),
                     std::span<double>(out, static_cast<std::size_t>(w.rows)));
  return id;
}

int Tape::concat(int a, int b) {
  const int da = nodes_[static_cast<std::size_t>(a)].dim;
  const int db = nodes_[static_cast<std::size_t>(b)].dim;
  Node n{Op::Concat, 0, da + db};
  n.a = a;
  n.b = b;
  int id = push_node(n);
  double* out = vals(nodes_[static_cast<std::size_t>(id)]);
  std::copy_n(vals(nodes_[static_cast<std::size_t>(a)]), da, out);
  std::copy_n(vals(nodes_[static_cast<std::size_t>(b)]), db, out + da);
  return id;
}

int Tape::hadamard(int a, int b) {
  const int da = nodes_[static_cast<std::size_t>(a)].dim;
  if (da != nodes_[static_cast<std::size_t>(b)].dim)
    throw ShapeError("Tape::hadamard: dim mismatch");
  Node n{Op::Hadamard, 0, da};
  n.a = a;
  n.b = b;
  int id = push_node(n);
  const double* pa = vals(nodes_[static_cast<std::size_t>(a)]);
  const double* pb = vals(nodes_[static_cast<std::size_t>(b)]);
  double* out = vals(nodes_[static_cast<std::size_t>(id)]);
  for (int i = 0; i < da; ++i) out[i] = pa[i] * pb[i];
  return id;
}

int Tape::gate_mix(int z, int h, int n_node) {
  const int d = nodes_[static_cast<std::size_t>(z)].dim;
  if (d != nodes_[static_cast<std::size_t>(h)].dim ||
      d != nodes_[static_cast<std::size_t>(n_node)].dim)
    throw ShapeError("Tape::gate_mix: dim mismatch");
  Node n{Op::GateMix, 0, d};
  n.a = z;
  n.b = h;
  n.c = n_node;
  int id = push_node(n);
  const double* pz = vals(nodes_[static_cast<std::size_t>(z)]);
  const double* ph = vals(nodes_[static_cast<std::size_t>(h)]);
  const double* pn = vals(nodes_[static_cast<std::size_t>(n_node)]);
  double* out = vals(nodes_[static_cast<std::size_t>(id)]);
  for (int i = 0; i < d; ++i) out[i] = pz[i] * ph[i] + (1.0 - pz[i]) * pn[i];
  return id;
}

int Tape::dots(int phi, std::span<const int> embeds) {
  if (embeds.empty()) throw UsageError("Tape::dots: no embeddings");
  const int d = nodes_[static_cast<std::size_t>(phi)].dim;
  for (int e : embeds)
    if (nodes_[static_cast<std::size_t>(e)].dim != d)
      throw ShapeError("Tape::dots: embedding dim != phi dim");
  Node n{Op::Dots, 0, static_cast<int>(embeds.size())};
  n.a = phi;
  n.aux_offset = static_cast<int>(aux_.size());
  n.aux_count = static_cast<int>(embeds.size());
  aux_.insert(aux_.end(), embeds.begin(), embeds.end());
  int id = push_node(n);
  const double* pp = vals(nodes_[static_cast<std::size_t>(phi)]);
  double* out = vals(nodes_[static_cast<std::size_t>(id)]);
  for (int g = 0; g < static_cast<int>(embeds.size()); ++g) {
    const double* pe = vals(nodes_[static_cast<std::size_t>(embeds[static_cast<std::size_t>(g)])]);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += pp[i] * pe[i];
    out[g] = acc;
  }
  return id;
}

std::span<const double> Tape::value(int node) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  return {vals_.data() + n.offset, static_cast<std::size_t>(n.dim)};
}

int Tape::dim(int node) const {
  return nodes_[static_cast<std::size_t>(node)].dim;
}

void Tape::seed_gradient(int node, std::span<const double> g) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (static_cast<int>(g.size()) != n.dim)
    throw ShapeError("Tape::seed_gradient: dim mismatch");
  double* gp = grads(n);
  for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
}

void Tape::seed_gradient(int node, int index, double g) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (index < 0 || index >= n.dim)
    throw ShapeError("Tape::seed_gradient: index out of range");
  grads(n)[index] += g;
}

void Tape::backward() {
  if (nodes_.empty()) throw UsageError("Tape::backward: no forward recorded");
  if (swept_) throw UsageError("Tape::backward: already swept this record");
  swept_ = true;

  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    Node& n = nodes_[idx];
    const double* g = grads(n);
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Dense: {
        auto& wb = store_->block(n.w_block);
        auto& bb = store_->block(n.b_block);
        Node& nx = nodes_[static_cast<std::size_t>(n.a)];
        const double* out = vals(n);
        const double* xv = vals(nx);
        double* gx = grads(nx);
        const int rows = wb.value.rows, cols = wb.value.cols;
        for (int r = 0; r < rows; ++r) {
          double dpre = g[r];
          switch (n.act) {
            case Activation::ReLU: dpre = out[r] > 0.0 ? dpre : 0.0; break;
            case Activation::Tanh: dpre *= 1.0 - out[r] * out[r]; break;
            case Activation::Sigmoid: dpre *= out[r] * (1.0 - out[r]); break;
            case Activation::Identity: break;
          }
          if (dpre == 0.0) continue;
          bb.grad[static_cast<std::size_t>(r)] += dpre;
          const double* wr = wb.value.row(r);
          double* gw = wb.grad.data() + static_cast<std::size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) {
            gw[c] += dpre * xv[c];
            gx[c] += dpre * wr[c];
          }
        }
        break;
      }
      case Op::Concat: {
        Node& na = nodes_[static_cast<std::size_t>(n.a)];
        Node& nb = nodes_[static_cast<std::size_t>(n.b)];
        double* ga = grads(na);
        double* gb = grads(nb);
        for (int i = 0; i < na.dim; ++i) ga[i] += g[i];
        for (int i = 0; i < nb.dim; ++i) gb[i] += g[na.dim + i];
        break;
      }
      case Op::Hadamard: {
        Node& na = nodes_[static_cast<std::size_t>(n.a)];
        Node& nb = nodes_[static_cast<std::size_t>(n.b)];
        const double* va = vals(na);
        const double* vb = vals(nb);
        double* ga = grads(na);
        double* gb = grads(nb);
        for (int i = 0; i < n.dim; ++i) {
          ga[i] += g[i] * vb[i];
          gb[i] += g[i] * va[i];
        }
        break;
      }
      case Op::GateMix: {
        Node& nz = nodes_[static_cast<std::size_t>(n.a)];
        Node& nh = nodes_[static_cast<std::size_t>(n.b)];
        Node& nn = nodes_[static_cast<std::size_t>(n.c)];
        const double* vz = vals(nz);
        const double* vh = vals(nh);
        const double* vn = vals(nn);
        double* gz = grads(nz);
        double* gh = grads(nh);
        double* gn = grads(nn);
        for (int i = 0; i < n.dim; ++i) {
          gz[i] += g[i] * (vh[i] - vn[i]);
          gh[i] += g[i] * vz[i];
          gn[i] += g[i] * (1.0 - vz[i]);
        }
        break;
      }
      case Op::Dots: {
        Node& np = nodes_[static_cast<std::size_t>(n.a)];
        const double* vp = vals(np);
        double* gp = grads(np);
        for (int gi = 0; gi < n.aux_count; ++gi) {
          double gs = g[gi];
          if (gs == 0.0) continue;
          Node& ne = nodes_[static_cast<std::size_t>(
              aux_[static_cast<std::size_t>(n.aux_offset + gi)])];
          const double* ve = vals(ne);
          double* ge = grads(ne);
          for (int i = 0; i < np.dim; ++i) {
            gp[i] += gs * ve[i];
            ge[i] += gs * vp[i];
          }
        }
        break;
      }
    }
  }
}

}  // namespace ecosim::tensor
