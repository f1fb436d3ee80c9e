#include "tangram/kernels.hpp"

namespace tangram::kernels {
namespace {

std::uint64_t popcount_scalar(const std::uint64_t* w, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += __builtin_popcountll(w[i]);
  return total;
}

std::uint64_t and_popcount_scalar(const std::uint64_t* a,
                                  const std::uint64_t* b, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += __builtin_popcountll(a[i] & b[i]);
  return total;
}

void or_inplace_scalar(std::uint64_t* dst, const std::uint64_t* src,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 std::size_t lda, const double* b, std::size_t ldb, double* c,
                 std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * lda + p];
      if (av == 0.0) continue;
      const double* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",        popcount_scalar, and_popcount_scalar,
      or_inplace_scalar, dot_scalar,    axpy_scalar,
      gemm_scalar,
  };
  return backend;
}

}  // namespace tangram::kernels
