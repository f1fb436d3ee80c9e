#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tangram {

// splitmix64; used for seed derivation so that (base, stream) pairs give
// decorrelated generator states.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

// mt19937_64 with hand-rolled distributions. std:: distributions are not
// pinned across library implementations; these are, which keeps generated
// corpora and training runs byte-reproducible everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here:
  // n is tiny relative to 2^64, the bias is ~n/2^64.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(next() % n);
  }

  // Uniform double in [0, 1).
  double real() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double range(double lo, double hi) { return lo + (hi - lo) * real(); }

  // Marsaglia polar; deterministic given the engine state.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * real() - 1.0;
      v = 2.0 * real() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    have_spare_ = true;
    return u * k;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tangram
