#include "cirptc/simd.hpp"

namespace cirptc::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

void gemm_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      axpy_scalar(aip, b + p * n, ci, n);
    }
  }
}

void gemm_nt_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = dot_scalar(a + i * k, b + j * k, k);
}

void cmul_acc_scalar(const double* a, const double* b, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    acc[2 * i] += ar * br - ai * bi;
    acc[2 * i + 1] += ar * bi + ai * br;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Level::scalar, dot_scalar,     axpy_scalar,    gemv_scalar,
                                 gemm_scalar,   gemm_nt_scalar, cmul_acc_scalar};
  return table;
}

}  // namespace cirptc::simd
