#pragma once

#include <string>
#include <vector>

namespace ecosim::core {

/// Point in topic space. User and provider preferences are unit vectors in
/// R^K; content topics are one-hot.
struct TopicVector {
  std::vector<double> values;

  TopicVector() = default;
  explicit TopicVector(int k) : values(static_cast<std::size_t>(k), 0.0) {}

  static TopicVector one_hot(int k, int index);

  int size() const { return static_cast<int>(values.size()); }
  double dot(const TopicVector& other) const;
  double norm() const;

  /// Scales to unit norm. Returns false (leaving the vector untouched) when
  /// the norm is too small to normalise meaningfully.
  bool normalize();
};

struct Document {
  int id = 0;
  int topic = 0;  // index into topic space; one-hot as a TopicVector
  double quality = 0.0;
  int provider_id = 0;
  int created_at = 0;  // environment step when the document appeared

  TopicVector topic_vector(int k) const { return TopicVector::one_hot(k, topic); }
};

struct UserState {
  int id = 0;
  TopicVector preference;        // unit vector
  double quality_sensitivity = 0.0;  // weight on quality vs. topic match
  double preference_drift = 0.0;     // step size of preference updates
};

/// Monotone map from accumulated feedback to satisfaction.
///
/// Linear:        f(x) = slope * (x + offset)
/// SaturatedLog:  f(x) = scale * ln(1 + x + offset)   for x + offset >= 0
///                f(x) = scale * (x + offset)         otherwise
/// The SaturatedLog branches meet at x + offset = 0 with matching value and
/// slope, so f is C^1 everywhere.
struct SatisfactionFn {
  enum class Kind { Linear, SaturatedLog };

  Kind kind = Kind::Linear;
  double param = 1.0;      // slope (Linear) or scale (SaturatedLog); positive
  double offset_x0 = 0.0;  // initial accumulated-feedback offset; sets f(0)

  double operator()(double x) const;
};

double satisfaction_value(const SatisfactionFn& fn, double accumulated_feedback);

struct ProviderState {
  int id = 0;
  TopicVector preference;            // unit vector
  double accumulated_feedback = 0.0; // running sum of per-step feedback
  double satisfaction = 0.0;         // satisfaction_fn(accumulated_feedback)
  bool viable = true;

  // Dynamics parameters (fixed over an episode).
  double no_rec_drift = 0.0;          // negative; feedback drift with no exposure
  double exposure_sensitivity = 0.0;  // weight on recommendation count
  double feedback_sensitivity = 0.0;  // weight on summed user reward
  double preference_drift = 0.0;      // step size of preference updates
  double creation_rate = 0.0;         // documents created per unit of reward
  double quality_mean = 0.0;
  double quality_std = 0.0;
  double viability_threshold = 0.0;   // leaves when satisfaction drops below
  SatisfactionFn satisfaction_fn;

  std::vector<int> documents;  // ids of the documents this provider owns
  int group = 0;  // index of the provider group this provider was drawn from
};

}  // namespace ecosim::core
