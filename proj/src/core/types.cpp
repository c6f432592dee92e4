#include "ecosim/core/types.hpp"

#include <cmath>

#include "ecosim/core/errors.hpp"

namespace ecosim::core {

namespace {
constexpr double kMinNorm = 1e-12;
}

TopicVector TopicVector::one_hot(int k, int index) {
  if (k < 1 || index < 0 || index >= k)
    throw ConfigError("TopicVector::one_hot: index out of range");
  TopicVector v(k);
  v.values[static_cast<std::size_t>(index)] = 1.0;
  return v;
}

double TopicVector::dot(const TopicVector& other) const {
  if (values.size() != other.values.size())
    throw ShapeError("TopicVector::dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * other.values[i];
  return s;
}

double TopicVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

bool TopicVector::normalize() {
  double n = norm();
  if (n < kMinNorm) return false;
  for (double& v : values) v /= n;
  return true;
}

double SatisfactionFn::operator()(double x) const {
  double shifted = x + offset_x0;
  switch (kind) {
    case Kind::Linear:
      return param * shifted;
    case Kind::SaturatedLog:
      return shifted >= 0.0 ? param * std::log1p(shifted) : param * shifted;
  }
  throw UsageError("SatisfactionFn: unknown kind");
}

double satisfaction_value(const SatisfactionFn& fn, double accumulated_feedback) {
  return fn(accumulated_feedback);
}

}  // namespace ecosim::core
