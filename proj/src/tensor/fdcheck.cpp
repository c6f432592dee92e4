#include "ecosim/tensor/fdcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ecosim::tensor {

FdReport finite_difference_check(ParameterStore& store,
                                 const std::function<double()>& loss_fn,
                                 const std::function<void()>& grad_fn,
                                 const FdOptions& options) {
  grad_fn();
  // Snapshot analytic gradients before perturbation runs overwrite them.
  std::vector<std::vector<double>> analytic;
  analytic.reserve(static_cast<std::size_t>(store.count()));
  for (int i = 0; i < store.count(); ++i) analytic.push_back(store.block(i).grad);

  FdReport report;
  const double h = options.step;
  for (int bi = 0; bi < store.count(); ++bi) {
    auto& block = store.block(bi);
    const std::size_t n = block.value.size();
    std::size_t stride = 1;
    if (options.max_checks_per_block > 0 &&
        n > static_cast<std::size_t>(options.max_checks_per_block))
      stride = n / static_cast<std::size_t>(options.max_checks_per_block);
    for (std::size_t i = 0; i < n; i += stride) {
      double saved = block.value.data[i];
      block.value.data[i] = saved + h;
      double up = loss_fn();
      block.value.data[i] = saved - h;
      double down = loss_fn();
      block.value.data[i] = saved;
      double numeric = (up - down) / (2.0 * h);
      double a = analytic[static_cast<std::size_t>(bi)][i];
      double denom = std::max({std::abs(a), std::abs(numeric), options.denom_floor});
      double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_block = block.name;
        report.worst_index = static_cast<int>(i);
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace ecosim::tensor
