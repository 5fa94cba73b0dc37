#include "taco/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace taco {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 kept away from 0.
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Rng::exponential() {
  double u = uniform();
  while (u <= 1e-300) u = uniform();
  return -std::log(u);
}

uint64_t fork_seed(uint64_t base_seed, uint64_t stream_id) {
  // one splitmix round over the pair
  uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng fork(uint64_t base_seed, uint64_t stream_id) {
  return Rng(fork_seed(base_seed, stream_id));
}

std::vector<double> sample_simplex(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("sample_simplex: dim must be >= 1");
  std::vector<double> b(dim);
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    b[i] = rng.exponential();
    sum += b[i];
  }
  for (int i = 0; i < dim; ++i) b[i] /= sum;
  return b;
}

}  // namespace taco
