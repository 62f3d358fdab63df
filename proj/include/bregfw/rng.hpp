#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bregfw {

// Seeded generator with hand-rolled transforms so that sampled streams depend
// only on the mt19937_64 bit stream, not on libstdc++'s distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; two uniforms per draw, no cached spare, so the stream is
  // position-independent.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t integer(std::uint64_t n) {  // uniform in [0, n)
    return gen_() % n;
  }

  // Uniform point on the standard simplex {w >= 0, sum w = 1} of dimension n,
  // via normalized exponentials (flat Dirichlet).
  std::vector<double> simplex_uniform(std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& wi : w) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      wi = -std::log(u);
      s += wi;
    }
    for (auto& wi : w) wi /= s;
    return w;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bregfw
