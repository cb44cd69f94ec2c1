#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace kantsc {

// Deterministic splitmix64 stream. Self-contained so that seeded runs are
// bit-reproducible across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased-enough integer draw for shuffles and subsampling.
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Box-Muller; one fresh pair per call keeps the stream layout simple.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Derived stream, decorrelated from the parent by a fixed mix.
  Rng fork(std::uint64_t stream) const {
    return Rng(state_ ^ (0xD1B54A32D192ED03ull * (stream + 1)));
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace kantsc
