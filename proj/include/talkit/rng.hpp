#pragma once

#include <cmath>
#include <cstdint>

#include "talkit/error.hpp"

namespace talkit {

// splitmix64 mixing step. Used both as the generator core and to derive
// independent sub-stream seeds (per video, per model, per repeat).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
  return splitmix64(splitmix64(base) + k);
}

// Deterministic 64-bit generator (splitmix64 counter stream). The exact
// draw sequence is part of the output contract so that independent code
// can replay it; see docs/FORMATS.md.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Multiply-shift map of one 64-bit draw;
  // the O(n/2^64) bias is irrelevant at simulator scales.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw DomainError("next_below: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform integer in [lo, hi], inclusive.
  long long next_int_in(long long lo, long long hi) {
    if (lo > hi) throw DomainError("next_int_in: empty range");
    return lo + static_cast<long long>(
                    next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform real in [lo, hi).
  double next_in(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Knuth's product-of-uniforms method. Consumes a variable number of
  // draws; always at least one.
  long next_poisson(double lambda) {
    if (lambda < 0.0) throw DomainError("next_poisson: negative rate");
    if (lambda > 500.0)
      throw DomainError("next_poisson: rate too high for the product method");
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace talkit
