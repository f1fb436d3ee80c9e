#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the raster and policy modules.
// Every kernel has a scalar reference implementation and may have SIMD
// variants; the active backend is picked once at startup from CPU features
// and can be overridden with force_backend() or the TANGRAM_KERNELS
// environment variable ("scalar", "avx2", "neon").

namespace tangram::kernels {

// C = A*B, optionally accumulating into C. Row-major.
// A is m x k (leading dim lda), B is k x n (ldb), C is m x n (ldc).
using GemmFn = void (*)(std::size_t m, std::size_t n, std::size_t k,
                        const double* a, std::size_t lda, const double* b,
                        std::size_t ldb, double* c, std::size_t ldc,
                        bool accumulate);

struct Backend {
  const char* name;
  std::uint64_t (*popcount)(const std::uint64_t* w, std::size_t n);
  std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t n);
  void (*or_inplace)(std::uint64_t* dst, const std::uint64_t* src,
                     std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
  GemmFn gemm;
};

const Backend& scalar_backend();

// nullptr when the CPU or the build lacks the instruction set.
const Backend* avx2_backend();
const Backend* neon_backend();

const Backend& active();

// name = "scalar"/"avx2"/"neon", or nullptr to restore auto-detection.
// Throws std::invalid_argument for unknown or unavailable backends.
void force_backend(const char* name);

}  // namespace tangram::kernels
