#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace fedflow {

// Counter RNG based on splitmix64. One word of state, so per-node and
// per-tree streams serialize as a single integer and travel with models.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0,n), unbiased (masked rejection)
  uint64_t below(uint64_t n);

  // standard normal, Box-Muller (second variate discarded)
  double normal();

  // Poisson with mean 1, Knuth's product method
  int poisson1();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

 private:
  uint64_t state_;
};

// Stable child-stream label: a pure function of (seed, tag, index), so the
// set of streams a run uses does not depend on evaluation order.
uint64_t derive_stream(uint64_t seed, std::string_view tag, uint64_t index = 0);

}  // namespace fedflow
