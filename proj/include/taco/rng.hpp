#pragma once

#include <cstdint>
#include <vector>

namespace taco {

// Deterministic random source. Distributions are hand-rolled on top of
// splitmix64 so that streams are reproducible bit-for-bit across standard
// library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : s_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {}

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (pair cached).
  double normal();

  // Unit-rate exponential.
  double exponential();

  // Uniform integer in [0, n), n > 0.
  size_t index(size_t n) { return static_cast<size_t>(uniform() * static_cast<double>(n)); }

 private:
  uint64_t s_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream from a base seed and a stream id.
Rng fork(uint64_t base_seed, uint64_t stream_id);
uint64_t fork_seed(uint64_t base_seed, uint64_t stream_id);

// Uniform draw from the unit simplex (normalized unit-rate exponentials,
// equivalent to a flat Dirichlet).
std::vector<double> sample_simplex(int dim, Rng& rng);

}  // namespace taco
