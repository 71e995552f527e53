#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cirptc {

using RealVector = std::vector<double>;

// Row-major real matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  DenseMatrix transposed() const;

  static DenseMatrix identity(std::size_t n);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = A x using the active SIMD kernels.
RealVector matvec(const DenseMatrix& a, std::span<const double> x);
// C = A B.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A B^T.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

double norm2(std::span<const double> v);
double max_abs(std::span<const double> v);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);

// Throws DomainError naming `what` if any value is NaN or infinite.
void require_finite(std::span<const double> v, const std::string& what);

}  // namespace cirptc
