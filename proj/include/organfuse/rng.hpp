#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace organfuse {

// Deterministic random machinery. Everything here is pinned to exact
// algorithms (mt19937_64 plus the draw procedures below) so that runs are
// reproducible bit-for-bit given a seed, independent of the standard
// library's unspecified distribution implementations.

uint64_t fnv1a64(std::string_view s);

// SplitMix64 output function; used to derive independent sub-stream seeds
// from a master seed. derive_seed(seed, k) for distinct k yields
// decorrelated seeds.
uint64_t splitmix64(uint64_t x);
uint64_t derive_seed(uint64_t seed, uint64_t stream);

class DeterministicRng {
 public:
  explicit DeterministicRng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n) by rejection sampling; n > 0.
  uint64_t next_below(uint64_t n);

  // Uniform integer in [lo, hi] inclusive.
  uint64_t next_between(uint64_t lo, uint64_t hi) {
    return lo + next_below(hi - lo + 1);
  }

  // Poisson draw truncated at max_value. Uses the exponential
  // inter-arrival method (count arrivals while the running sum of
  // -log(u) stays within lambda), stopping early once max_value is
  // reached.
  uint64_t poisson_truncated(double lambda, uint64_t max_value);

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double next_normal();

 private:
  std::mt19937_64 engine_;
};

// In-place Fisher-Yates shuffle driven by next_below; algorithm identifier
// "fy-mt19937_64-v1" (documented in the README so splits can be reproduced
// by other implementations).
template <typename T>
void fisher_yates_shuffle(std::vector<T>& items, DeterministicRng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace organfuse
