#include "organfuse/rng.hpp"

#include <cmath>

namespace organfuse {

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

uint64_t DeterministicRng::next_below(uint64_t n) {
  // Rejection sampling over the top multiple of n keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

uint64_t DeterministicRng::poisson_truncated(double lambda, uint64_t max_value) {
  if (lambda <= 0.0 || max_value == 0) return 0;
  double sum = 0.0;
  uint64_t count = 0;
  while (count < max_value) {
    double u = next_double();
    if (u <= 0.0) u = 0x1.0p-53;  // guard log(0)
    sum += -std::log(u);
    if (sum > lambda) break;
    ++count;
  }
  return count;
}

double DeterministicRng::next_normal() {
  double u1 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace organfuse
