#pragma once

#include <vector>

namespace ecosim::tensor {

/// Dense row-major matrix. Vectors are rows x 1.
struct Tensor2D {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor2D() = default;
  Tensor2D(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }
  std::size_t size() const { return data.size(); }
};

}  // namespace ecosim::tensor
