#include "fedflow/rng.hpp"

#include <cmath>

namespace fedflow {

uint64_t Rng::below(uint64_t n) {
  if (n <= 1) return 0;
  uint64_t mask = ~0ULL >> __builtin_clzll((n - 1) | 1);
  for (;;) {
    uint64_t v = next_u64() & mask;
    if (v < n) return v;
  }
}

double Rng::normal() {
  // u1 in (0,1] so log() stays finite
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

int Rng::poisson1() {
  static const double kL = std::exp(-1.0);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= next_double();
  } while (p > kL);
  return k - 1;
}

uint64_t derive_stream(uint64_t seed, std::string_view tag, uint64_t index) {
  // FNV-1a over the tag, then splitmix-style mixing with seed and index
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  Rng mix(seed ^ h);
  mix.next_u64();
  mix.set_state(mix.state() ^ (index * 0x9e3779b97f4a7c15ULL));
  return mix.next_u64();
}

}  // namespace fedflow
