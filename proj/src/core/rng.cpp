#include "ecosim/core/rng.hpp"

#include <cmath>
#include <numbers>

#include "ecosim/core/errors.hpp"

namespace ecosim::core {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view tag,
                     std::uint64_t entity_id, std::uint64_t step) {
  std::uint64_t s = mix64(master_seed ^ fnv1a64(tag));
  s = mix64(s ^ (entity_id * 0x9e3779b97f4a7c15ull));
  s = mix64(s ^ (step * 0xd1b54a32d192ed03ull));
  state_ = s;
}

std::uint64_t RngStream::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  return mix64(state_);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // Box-Muller on (0,1] x [0,1) uniforms; u1 stays away from zero.
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(theta);
  has_cached_gaussian_ = true;
  return r * std::cos(theta);
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw UsageError("RngStream::next_below: n must be positive");
  // Multiply-shift map of a full 64-bit draw onto {0..n-1}. The bias is at
  // most n / 2^64, irrelevant at the sizes used here.
  using u128 = unsigned __int128;
  return static_cast<std::uint64_t>((u128(next_u64()) * u128(n)) >> 64);
}

int RngStream::sample_categorical(const std::vector<double>& probs) {
  if (probs.empty()) throw UsageError("sample_categorical: empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw UsageError("sample_categorical: negative weight");
    total += p;
  }
  if (total <= 0.0) throw UsageError("sample_categorical: zero-mass distribution");
  double u = next_double() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Round-off can leave u marginally above the final cumulative value.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace ecosim::core
