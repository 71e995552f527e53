// Compiled with -mavx2 -mfma; only reached after a CPUID check in dispatch.cpp.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace cirptc::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

void gemm_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      axpy_avx2(aip, b + p * n, ci, n);
    }
  }
}

void gemm_nt_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot_avx2(a + i * k, b + j * k, k);
}

// Two complex values per register: [r0 i0 r1 i1].
void cmul_acc_avx2(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * i);
    const __m256d vb = _mm256_loadu_pd(b + 2 * i);
    const __m256d b_re = _mm256_movedup_pd(vb);         // br br
    const __m256d b_im = _mm256_permute_pd(vb, 0b1111);  // bi bi
    const __m256d a_sw = _mm256_permute_pd(va, 0b0101);  // ai ar
    const __m256d t = _mm256_mul_pd(a_sw, b_im);         // ai*bi ar*bi
    const __m256d prod = _mm256_fmaddsub_pd(va, b_re, t);  // ar*br-ai*bi, ai*br+ar*bi
    _mm256_storeu_pd(acc + 2 * i, _mm256_add_pd(_mm256_loadu_pd(acc + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    acc[2 * i] += ar * br - ai * bi;
    acc[2 * i + 1] += ar * bi + ai * br;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Level::avx2, dot_avx2,     axpy_avx2,    gemv_avx2,
                                 gemm_avx2,   gemm_nt_avx2, cmul_acc_avx2};
  return table;
}

}  // namespace cirptc::simd::detail
