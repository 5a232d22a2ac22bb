#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace budgetwise {

// Counter-based deterministic randomness. Every random quantity in the
// toolkit is addressed by a key derived from (master seed, purpose, indices),
// so simulation results do not depend on evaluation order or worker count,
// and a consumer that needs fewer draws from a stream reads a prefix of it.

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child key from a parent key and an index word.
constexpr std::uint64_t rng_child(std::uint64_t key, std::uint64_t word) noexcept {
  std::uint64_t h = key ^ mix64(word + 0x9e3779b97f4a7c15ULL);
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return mix64(h);
}

/// Stateless-by-key random stream: draw i is a pure function of (key, i).
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    ++ctr_;
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * ctr_);
  }

  /// Uniform double in the open interval (0, 1).
  double next_u01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two raw draws.
  double next_normal() noexcept {
    const double u1 = next_u01();
    const double u2 = next_u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool next_bernoulli(double p) noexcept { return next_u01() < p; }

  /// Index z with probability probs[z]; probs must sum to 1.
  int next_categorical(std::span<const double> probs) noexcept {
    const double u = next_u01();
    double cum = 0.0;
    for (std::size_t z = 0; z + 1 < probs.size(); ++z) {
      cum += probs[z];
      if (u < cum) return static_cast<int>(z);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace budgetwise
