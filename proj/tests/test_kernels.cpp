#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "tangram/kernels.hpp"
#include "tangram/rng.hpp"

using namespace tangram;

namespace {

std::vector<std::uint64_t> random_words(Rng& rng, std::size_t n) {
  std::vector<std::uint64_t> out(n);
  for (auto& w : out) w = rng.next();
  return out;
}

std::vector<double> random_reals(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& f : out) f = rng.range(-1.0, 1.0);
  return out;
}

const kernels::Backend* simd() {
  if (const auto* b = kernels::avx2_backend()) return b;
  if (const auto* b = kernels::neon_backend()) return b;
  return nullptr;
}

}  // namespace

TEST_CASE("integer kernels match scalar exactly") {
  const auto* vec = simd();
  if (vec == nullptr) return;  // no SIMD on this host
  const auto& ref = kernels::scalar_backend();
  Rng rng(17);
  // sizes straddling vector widths, including 0 and raster-sized 225
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 31u, 225u}) {
    auto a = random_words(rng, n);
    auto b = random_words(rng, n);
    CHECK(ref.popcount(a.data(), n) == vec->popcount(a.data(), n));
    CHECK(ref.and_popcount(a.data(), b.data(), n) ==
          vec->and_popcount(a.data(), b.data(), n));
    auto d1 = a, d2 = a;
    ref.or_inplace(d1.data(), b.data(), n);
    vec->or_inplace(d2.data(), b.data(), n);
    CHECK(d1 == d2);
  }
}

TEST_CASE("real kernels match scalar within tolerance") {
  const auto* vec = simd();
  if (vec == nullptr) return;
  const auto& ref = kernels::scalar_backend();
  Rng rng(23);
  for (std::size_t n : {1u, 5u, 8u, 17u, 64u, 333u, 5408u}) {
    auto a = random_reals(rng, n);
    auto b = random_reals(rng, n);
    const double r = ref.dot(a.data(), b.data(), n);
    const double v = vec->dot(a.data(), b.data(), n);
    CHECK(std::abs(r - v) <= 1e-12 * (1.0 + std::abs(r)));

    auto y1 = random_reals(rng, n);
    auto y2 = y1;
    ref.axpy(y1.data(), 0.37, a.data(), n);
    vec->axpy(y2.data(), 0.37, a.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(y1[i] - y2[i]) <= 1e-15);
    }
  }
}

TEST_CASE("gemm variants agree on awkward shapes") {
  const auto* vec = simd();
  if (vec == nullptr) return;
  const auto& ref = kernels::scalar_backend();
  Rng rng(29);
  struct Shape {
    std::size_t m, n, k;
  };
  for (Shape s : {Shape{1, 1, 1}, Shape{3, 17, 5}, Shape{4, 16, 8},
                  Shape{7, 33, 50}, Shape{16, 169, 288}, Shape{5, 23, 144}}) {
    auto a = random_reals(rng, s.m * s.k);
    auto b = random_reals(rng, s.k * s.n);
    std::vector<double> c1(s.m * s.n), c2(s.m * s.n);
    for (bool accumulate : {false, true}) {
      if (accumulate) {
        auto init = random_reals(rng, s.m * s.n);
        c1 = init;
        c2 = init;
      }
      ref.gemm(s.m, s.n, s.k, a.data(), s.k, b.data(), s.n, c1.data(), s.n,
                accumulate);
      vec->gemm(s.m, s.n, s.k, a.data(), s.k, b.data(), s.n, c2.data(), s.n,
                 accumulate);
      for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(std::abs(c1[i] - c2[i]) <= 1e-12 * (1.0 + std::abs(c1[i])));
      }
    }
  }
}

TEST_CASE("backend dispatch honors forcing") {
  kernels::force_backend("scalar");
  CHECK(std::strcmp(kernels::active().name, "scalar") == 0);
  kernels::force_backend(nullptr);
  CHECK_THROWS(kernels::force_backend("no-such-backend"));
  if (kernels::avx2_backend() != nullptr) {
    kernels::force_backend("avx2");
    CHECK(std::strcmp(kernels::active().name, "avx2") == 0);
    kernels::force_backend(nullptr);
  }
}
