#pragma once

// Block-circulant matrices: storage, expansion, exact and FFT matrix-vector
// products, projection, and the single-column kernel extension used to run an
// arbitrary dense kernel on a circulant crossbar.
//
// Convention: a circulant block is stored by its first ROW w (the primary
// vector). Entry (i, j) of the block is w[(j - i) mod l], so row i is w
// rotated right by i positions.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cirptc/fft.hpp"
#include "cirptc/linalg.hpp"

namespace cirptc::circulant {

class PrimaryVector {
 public:
  explicit PrimaryVector(std::vector<double> w);

  std::size_t order() const noexcept { return w_.size(); }
  std::span<const double> values() const noexcept { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }

 private:
  std::vector<double> w_;
};

class BlockCirculantMatrix {
 public:
  BlockCirculantMatrix() = default;
  // All-zero P x Q grid of order-l blocks.
  BlockCirculantMatrix(std::size_t p, std::size_t q, std::size_t l);
  // `primaries` holds P*Q*l values: block (i, j) occupies [(i*Q + j)*l, +l).
  BlockCirculantMatrix(std::size_t p, std::size_t q, std::size_t l, std::vector<double> primaries);

  static BlockCirculantMatrix from_blocks(const std::vector<std::vector<PrimaryVector>>& grid);

  std::size_t block_rows() const noexcept { return p_; }
  std::size_t block_cols() const noexcept { return q_; }
  std::size_t order() const noexcept { return l_; }
  std::size_t rows() const noexcept { return p_ * l_; }
  std::size_t cols() const noexcept { return q_ * l_; }

  std::span<const double> block(std::size_t i, std::size_t j) const;
  std::span<double> block(std::size_t i, std::size_t j);
  PrimaryVector primary(std::size_t i, std::size_t j) const;

  // Entry of the expanded matrix.
  double at(std::size_t r, std::size_t c) const;

  std::span<const double> parameters() const noexcept { return w_; }
  std::span<double> parameters() noexcept { return w_; }
  std::size_t stored_scalars() const noexcept { return w_.size(); }

  friend bool operator==(const BlockCirculantMatrix&, const BlockCirculantMatrix&) = default;

 private:
  std::size_t p_ = 0, q_ = 0, l_ = 0;
  std::vector<double> w_;
};

struct OpCounter {
  std::uint64_t real_multiplies = 0;
};

DenseMatrix circ_expand(const PrimaryVector& w);
DenseMatrix bcm_expand(const BlockCirculantMatrix& w);

// First column of the circulant block with first row `row`: c[0] = w[0],
// c[k] = w[l - k]. The same index reversal maps a block onto the crossbar.
std::vector<double> first_column(std::span<const double> row);

// Oracle path: expand to dense, then multiply.
RealVector bcm_matvec_direct(const BlockCirculantMatrix& w, std::span<const double> x,
                             OpCounter* counter = nullptr);

// Always runs the FFT path, regardless of order.
RealVector bcm_matvec_fft(const BlockCirculantMatrix& w, std::span<const double> x,
                          OpCounter* counter = nullptr);

// Per-block circulant loop for small orders, FFT from order kFftMinOrder up.
inline constexpr std::size_t kFftMinOrder = 8;
RealVector bcm_matvec(const BlockCirculantMatrix& w, std::span<const double> x,
                      OpCounter* counter = nullptr);

// Precomputed block spectra for repeated FFT products with the same weights.
class SpectralBcm {
 public:
  explicit SpectralBcm(const BlockCirculantMatrix& w);

  RealVector apply(std::span<const double> x, OpCounter* counter = nullptr) const;

  std::size_t rows() const noexcept { return p_ * l_; }
  std::size_t cols() const noexcept { return q_ * l_; }

 private:
  std::size_t p_, q_, l_;
  double weight_scale_;
  std::shared_ptr<const fft::FftPlan> plan_;
  std::vector<fft::Complex> spectra_;  // (i*Q + j)*l + k
};

std::vector<RealVector> partition_vector(std::span<const double> x, std::size_t l);

// Zero-pads `x` to a multiple of l (trailing zeros).
RealVector pad_to_multiple(std::span<const double> x, std::size_t l);

BlockCirculantMatrix bcm_transpose(const BlockCirculantMatrix& w);

// Frobenius-nearest block-circulant matrix: averages along circulant diagonals.
BlockCirculantMatrix bcm_project(const DenseMatrix& dense, std::size_t l);

struct ParamCount {
  std::uint64_t independent = 0;
  std::uint64_t dense_equivalent = 0;
  double ratio = 0.0;
};

ParamCount count_params(const BlockCirculantMatrix& w);

// A length-K kernel placed in one column of a (ceil(K/l)*l) x l BCM. Padding
// rows are appended after the kernel entries.
struct ExtendedKernel {
  BlockCirculantMatrix bcm;
  std::size_t target_column = 0;
  std::size_t kernel_length = 0;
  std::size_t padding_rows = 0;
};

ExtendedKernel circulant_extend_kernel(std::span<const double> flat_kernel, std::size_t l,
                                       std::size_t target_column = 0);

// Applies the transposed extended BCM to x (zero-padded to the BCM's row
// count) and returns the target output, i.e. flat_kernel . x.
double extended_dot(const ExtendedKernel& ext, std::span<const double> x);

}  // namespace cirptc::circulant
