#pragma once

#include <span>
#include <string>
#include <vector>

namespace ecosim::harness {

/// Sample mean and standard error (sample stddev / sqrt(n)). With fewer than
/// two points the standard error is reported as 0.
struct MetricStat {
  double mean = 0.0;
  double se = 0.0;
};

MetricStat mean_se(std::span<const double> values);

/// Ranks with ties averaged (1-based, as in rank correlation).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation; NaN when fewer than 2 points or either side has zero
/// variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (Pearson over average ranks); NaN in the same
/// degenerate cases as pearson().
double spearman(std::span<const double> x, std::span<const double> y);

/// Locale-independent decimal formatting with 9 significant digits, used for
/// every number written to report files.
std::string format_number(double value);

}  // namespace ecosim::harness
