#include "cirptc/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "cirptc/errors.hpp"
#include "cirptc/simd.hpp"

namespace cirptc {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw DimensionError("DenseMatrix: data length " + std::to_string(data_.size()) +
                         " != " + std::to_string(rows) + "x" + std::to_string(cols));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

RealVector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols())
    throw DimensionError("matvec: x has " + std::to_string(x.size()) + " entries, matrix has " +
                         std::to_string(a.cols()) + " columns");
  RealVector y(a.rows());
  simd::active().gemv(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  simd::active().gemm(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(),
                      b.cols());
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: inner dimensions differ");
  DenseMatrix c(a.rows(), b.rows());
  simd::active().gemm_nt(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(),
                         b.rows());
  return c;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(std::span<const double> v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      throw DomainError(what + ": non-finite value at index " + std::to_string(i));
}

}  // namespace cirptc
