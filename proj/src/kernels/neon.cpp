#include "tangram/kernels.hpp"

#if defined(__ARM_NEON) || defined(__ARM_NEON__)

#include <arm_neon.h>

namespace tangram::kernels {
namespace {

std::uint64_t popcount_neon(const std::uint64_t* w, std::size_t n) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint8x16_t v = vld1q_u8(reinterpret_cast<const std::uint8_t*>(w + i));
    total += vaddvq_u8(vcntq_u8(v));
  }
  for (; i < n; ++i) total += __builtin_popcountll(w[i]);
  return total;
}

std::uint64_t and_popcount_neon(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t n) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint8x16_t va = vld1q_u8(reinterpret_cast<const std::uint8_t*>(a + i));
    uint8x16_t vb = vld1q_u8(reinterpret_cast<const std::uint8_t*>(b + i));
    total += vaddvq_u8(vcntq_u8(vandq_u8(va, vb)));
  }
  for (; i < n; ++i) total += __builtin_popcountll(a[i] & b[i]);
  return total;
}

void or_inplace_neon(std::uint64_t* dst, const std::uint64_t* src,
                     std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t vd = vld1q_u64(dst + i);
    uint64x2_t vs = vld1q_u64(src + i);
    vst1q_u64(dst + i, vorrq_u64(vd, vs));
  }
  for (; i < n; ++i) dst[i] |= src[i];
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double* y, double alpha, const double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const Backend* neon_backend() {
  static const Backend backend = {
      "neon",          popcount_neon, and_popcount_neon,
      or_inplace_neon, dot_neon,      axpy_neon,
      scalar_backend().gemm,  // TODO: NEON gemm microkernel
  };
  return &backend;
}

}  // namespace tangram::kernels

#else

namespace tangram::kernels {
const Backend* neon_backend() { return nullptr; }
}  // namespace tangram::kernels

#endif
