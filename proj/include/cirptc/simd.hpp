#pragma once

// Data-parallel inner loops used across the library. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant. The variant is
// chosen once at startup from CPUID; tests compare both tables directly.

#include <cstddef>
#include <string_view>

namespace cirptc::simd {

enum class Level { scalar, avx2 };

struct KernelTable {
  Level level;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // C (m x n) = A (m x k) * B (k x n); all row-major. C is overwritten.
  void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n);
  // C (m x n) = A (m x k) * B^T where B is n x k.
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // acc[k] += a[k] * b[k] over n interleaved (re, im) complex values.
  void (*cmul_acc)(const double* a, const double* b, double* acc, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

// Best level supported by this CPU.
Level detected_level();

// Table used by the library. Defaults to detected_level().
const KernelTable& active();

// Forces a level (falls back to scalar if unsupported). Returns the level in effect.
Level set_level(Level level);

std::string_view level_name(Level level);

}  // namespace cirptc::simd
