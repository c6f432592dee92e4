#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace ecosim::core {

/// 64-bit FNV-1a over a byte string. Used for stream tags and for the
/// content hashes recorded in report manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// splitmix64 finalizer; bijective on 64-bit values.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based random stream. The entire state is a pure function of
/// (master_seed, tag, entity_id, step), so any consumer can reconstruct the
/// exact draw sequence regardless of execution order or thread count.
///
/// Consumers create one stream per (purpose, entity, step) and draw a small
/// number of values from it; streams are cheap to construct.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view tag,
            std::uint64_t entity_id = 0, std::uint64_t step = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double next_double();

  /// Standard normal via Box-Muller (both values used in turn).
  double next_gaussian();

  /// Uniform integer in {0, ..., n-1}; n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  /// Index draw from an explicit distribution; probabilities must be
  /// non-negative and are normalised by their sum internally.
  int sample_categorical(const std::vector<double>& probs);

 private:
  std::uint64_t state_;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace ecosim::core
