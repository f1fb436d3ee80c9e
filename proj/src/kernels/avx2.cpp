#include "tangram/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace tangram::kernels {
namespace {

std::uint64_t popcount_avx2(const std::uint64_t* w, std::size_t n) {
  std::uint64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    t0 += __builtin_popcountll(w[i]);
    t1 += __builtin_popcountll(w[i + 1]);
    t2 += __builtin_popcountll(w[i + 2]);
    t3 += __builtin_popcountll(w[i + 3]);
  }
  for (; i < n; ++i) t0 += __builtin_popcountll(w[i]);
  return t0 + t1 + t2 + t3;
}

std::uint64_t and_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t n) {
  std::uint64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0;
  std::size_t i = 0;
  alignas(32) std::uint64_t lanes[4];
  for (; i + 4 <= n; i += 4) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes),
                       _mm256_and_si256(va, vb));
    t0 += __builtin_popcountll(lanes[0]);
    t1 += __builtin_popcountll(lanes[1]);
    t2 += __builtin_popcountll(lanes[2]);
    t3 += __builtin_popcountll(lanes[3]);
  }
  for (; i < n; ++i) t0 += __builtin_popcountll(a[i] & b[i]);
  return t0 + t1 + t2 + t3;
}

void or_inplace_avx2(std::uint64_t* dst, const std::uint64_t* src,
                     std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i vd = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    __m256i vs = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                        _mm256_or_si256(vd, vs));
  }
  for (; i < n; ++i) dst[i] |= src[i];
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1),
                                  _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// 4 rows x 8 columns register-blocked microkernel; ragged edges fall back to
// a 4-wide column pass and a scalar tail.
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + (i + 0) * lda;
    const double* a1 = a + (i + 1) * lda;
    const double* a2 = a + (i + 2) * lda;
    const double* a3 = a + (i + 3) * lda;
    double* c0 = c + (i + 0) * ldc;
    double* c1 = c + (i + 1) * ldc;
    double* c2 = c + (i + 2) * ldc;
    double* c3 = c + (i + 3) * ldc;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d r00, r01, r10, r11, r20, r21, r30, r31;
      if (accumulate) {
        r00 = _mm256_loadu_pd(c0 + j);
        r01 = _mm256_loadu_pd(c0 + j + 4);
        r10 = _mm256_loadu_pd(c1 + j);
        r11 = _mm256_loadu_pd(c1 + j + 4);
        r20 = _mm256_loadu_pd(c2 + j);
        r21 = _mm256_loadu_pd(c2 + j + 4);
        r30 = _mm256_loadu_pd(c3 + j);
        r31 = _mm256_loadu_pd(c3 + j + 4);
      } else {
        r00 = r01 = r10 = r11 = r20 = r21 = r30 = r31 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * ldb + j;
        const __m256d b0 = _mm256_loadu_pd(brow);
        const __m256d b1 = _mm256_loadu_pd(brow + 4);
        const __m256d va0 = _mm256_set1_pd(a0[p]);
        const __m256d va1 = _mm256_set1_pd(a1[p]);
        const __m256d va2 = _mm256_set1_pd(a2[p]);
        const __m256d va3 = _mm256_set1_pd(a3[p]);
        r00 = _mm256_fmadd_pd(va0, b0, r00);
        r01 = _mm256_fmadd_pd(va0, b1, r01);
        r10 = _mm256_fmadd_pd(va1, b0, r10);
        r11 = _mm256_fmadd_pd(va1, b1, r11);
        r20 = _mm256_fmadd_pd(va2, b0, r20);
        r21 = _mm256_fmadd_pd(va2, b1, r21);
        r30 = _mm256_fmadd_pd(va3, b0, r30);
        r31 = _mm256_fmadd_pd(va3, b1, r31);
      }
      _mm256_storeu_pd(c0 + j, r00);
      _mm256_storeu_pd(c0 + j + 4, r01);
      _mm256_storeu_pd(c1 + j, r10);
      _mm256_storeu_pd(c1 + j + 4, r11);
      _mm256_storeu_pd(c2 + j, r20);
      _mm256_storeu_pd(c2 + j + 4, r21);
      _mm256_storeu_pd(c3 + j, r30);
      _mm256_storeu_pd(c3 + j + 4, r31);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d r0, r1, r2, r3;
      if (accumulate) {
        r0 = _mm256_loadu_pd(c0 + j);
        r1 = _mm256_loadu_pd(c1 + j);
        r2 = _mm256_loadu_pd(c2 + j);
        r3 = _mm256_loadu_pd(c3 + j);
      } else {
        r0 = r1 = r2 = r3 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * ldb + j);
        r0 = _mm256_fmadd_pd(_mm256_set1_pd(a0[p]), b0, r0);
        r1 = _mm256_fmadd_pd(_mm256_set1_pd(a1[p]), b0, r1);
        r2 = _mm256_fmadd_pd(_mm256_set1_pd(a2[p]), b0, r2);
        r3 = _mm256_fmadd_pd(_mm256_set1_pd(a3[p]), b0, r3);
      }
      _mm256_storeu_pd(c0 + j, r0);
      _mm256_storeu_pd(c1 + j, r1);
      _mm256_storeu_pd(c2 + j, r2);
      _mm256_storeu_pd(c3 + j, r3);
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) {
        const double* arow = a + (i + r) * lda;
        double acc = accumulate ? c[(i + r) * ldc + j] : 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * ldb + j];
        c[(i + r) * ldc + j] = acc;
      }
    }
  }
  for (; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d r0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        r0 = _mm256_fmadd_pd(_mm256_set1_pd(arow[p]),
                             _mm256_loadu_pd(b + p * ldb + j), r0);
      }
      _mm256_storeu_pd(crow + j, r0);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * ldb + j];
      crow[j] = acc;
    }
  }
}

}  // namespace

const Backend* avx2_backend() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) {
    return nullptr;
  }
  static const Backend backend = {
      "avx2",          popcount_avx2, and_popcount_avx2,
      or_inplace_avx2, dot_avx2,      axpy_avx2,
      gemm_avx2,
  };
  return &backend;
}

}  // namespace tangram::kernels

#else

namespace tangram::kernels {
const Backend* avx2_backend() { return nullptr; }
}  // namespace tangram::kernels

#endif
