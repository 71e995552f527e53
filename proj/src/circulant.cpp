#include "cirptc/circulant.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "cirptc/errors.hpp"
#include "cirptc/simd.hpp"

namespace cirptc::circulant {
namespace {

std::shared_ptr<const fft::FftPlan> cached_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const fft::FftPlan>> plans;
  std::lock_guard lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_shared<const fft::FftPlan>(n);
  return slot;
}

void check_input(const BlockCirculantMatrix& w, std::span<const double> x, const char* op) {
  if (x.size() != w.cols())
    throw DimensionError(std::string(op) + ": x has " + std::to_string(x.size()) +
                         " entries, BCM has " + std::to_string(w.cols()) + " columns");
}

}  // namespace

PrimaryVector::PrimaryVector(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw DimensionError("PrimaryVector: order must be positive");
  require_finite(w_, "PrimaryVector");
}

BlockCirculantMatrix::BlockCirculantMatrix(std::size_t p, std::size_t q, std::size_t l)
    : p_(p), q_(q), l_(l), w_(p * q * l, 0.0) {
  if (p == 0 || q == 0 || l == 0) throw DimensionError("BlockCirculantMatrix: empty grid");
}

BlockCirculantMatrix::BlockCirculantMatrix(std::size_t p, std::size_t q, std::size_t l,
                                           std::vector<double> primaries)
    : p_(p), q_(q), l_(l), w_(std::move(primaries)) {
  if (p == 0 || q == 0 || l == 0) throw DimensionError("BlockCirculantMatrix: empty grid");
  if (w_.size() != p * q * l)
    throw DimensionError("BlockCirculantMatrix: expected " + std::to_string(p * q * l) +
                         " primary values, got " + std::to_string(w_.size()));
  require_finite(w_, "BlockCirculantMatrix");
}

BlockCirculantMatrix BlockCirculantMatrix::from_blocks(
    const std::vector<std::vector<PrimaryVector>>& grid) {
  if (grid.empty() || grid.front().empty())
    throw DimensionError("BlockCirculantMatrix: empty grid");
  const std::size_t p = grid.size(), q = grid.front().size();
  const std::size_t l = grid.front().front().order();
  std::vector<double> data;
  data.reserve(p * q * l);
  for (const auto& row : grid) {
    if (row.size() != q) throw DimensionError("BlockCirculantMatrix: ragged block grid");
    for (const auto& b : row) {
      if (b.order() != l) throw DimensionError("BlockCirculantMatrix: mixed block orders");
      data.insert(data.end(), b.values().begin(), b.values().end());
    }
  }
  return BlockCirculantMatrix(p, q, l, std::move(data));
}

std::span<const double> BlockCirculantMatrix::block(std::size_t i, std::size_t j) const {
  return {w_.data() + (i * q_ + j) * l_, l_};
}

std::span<double> BlockCirculantMatrix::block(std::size_t i, std::size_t j) {
  return {w_.data() + (i * q_ + j) * l_, l_};
}

PrimaryVector BlockCirculantMatrix::primary(std::size_t i, std::size_t j) const {
  auto b = block(i, j);
  return PrimaryVector(std::vector<double>(b.begin(), b.end()));
}

double BlockCirculantMatrix::at(std::size_t r, std::size_t c) const {
  const std::size_t bi = r / l_, bj = c / l_;
  const std::size_t ri = r % l_, cj = c % l_;
  return block(bi, bj)[(cj + l_ - ri) % l_];
}

DenseMatrix circ_expand(const PrimaryVector& w) {
  const std::size_t l = w.order();
  DenseMatrix m(l, l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) m(i, j) = w[(j + l - i) % l];
  return m;
}

DenseMatrix bcm_expand(const BlockCirculantMatrix& w) {
  DenseMatrix m(w.rows(), w.cols());
  const std::size_t l = w.order();
  for (std::size_t bi = 0; bi < w.block_rows(); ++bi)
    for (std::size_t bj = 0; bj < w.block_cols(); ++bj) {
      auto b = w.block(bi, bj);
      for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j) m(bi * l + i, bj * l + j) = b[(j + l - i) % l];
    }
  return m;
}

std::vector<double> first_column(std::span<const double> row) {
  const std::size_t l = row.size();
  std::vector<double> c(l);
  for (std::size_t k = 0; k < l; ++k) c[k] = row[(l - k) % l];
  return c;
}

RealVector bcm_matvec_direct(const BlockCirculantMatrix& w, std::span<const double> x,
                             OpCounter* counter) {
  check_input(w, x, "bcm_matvec_direct");
  const DenseMatrix dense = bcm_expand(w);
  if (counter) counter->real_multiplies += std::uint64_t(w.rows()) * w.cols();
  return matvec(dense, x);
}

RealVector bcm_matvec_fft(const BlockCirculantMatrix& w, std::span<const double> x,
                          OpCounter* counter) {
  check_input(w, x, "bcm_matvec_fft");
  return SpectralBcm(w).apply(x, counter);
}

RealVector bcm_matvec(const BlockCirculantMatrix& w, std::span<const double> x,
                      OpCounter* counter) {
  check_input(w, x, "bcm_matvec");
  if (w.order() >= kFftMinOrder) return SpectralBcm(w).apply(x, counter);
  require_finite(x, "bcm_matvec");
  const std::size_t l = w.order();
  RealVector y(w.rows(), 0.0);
  for (std::size_t bi = 0; bi < w.block_rows(); ++bi)
    for (std::size_t bj = 0; bj < w.block_cols(); ++bj) {
      auto b = w.block(bi, bj);
      const double* xs = x.data() + bj * l;
      for (std::size_t i = 0; i < l; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < l; ++j) s += b[(j + l - i) % l] * xs[j];
        y[bi * l + i] += s;
      }
    }
  if (counter) counter->real_multiplies += std::uint64_t(w.rows()) * w.cols();
  return y;
}

SpectralBcm::SpectralBcm(const BlockCirculantMatrix& w)
    : p_(w.block_rows()),
      q_(w.block_cols()),
      l_(w.order()),
      weight_scale_(max_abs(w.parameters())),
      plan_(cached_plan(w.order())),
      spectra_(p_ * q_ * l_) {
  for (std::size_t i = 0; i < p_; ++i)
    for (std::size_t j = 0; j < q_; ++j) {
      const auto col = first_column(w.block(i, j));
      std::span<fft::Complex> s(spectra_.data() + (i * q_ + j) * l_, l_);
      for (std::size_t k = 0; k < l_; ++k) s[k] = col[k];
      plan_->forward(s);
    }
}

RealVector SpectralBcm::apply(std::span<const double> x, OpCounter* counter) const {
  if (x.size() != cols())
    throw DimensionError("SpectralBcm::apply: x has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(cols()));
  require_finite(x, "bcm_matvec_fft input");
  std::uint64_t mults = 0;

  std::vector<fft::Complex> xs(q_ * l_);
  for (std::size_t j = 0; j < q_; ++j) {
    std::span<fft::Complex> seg(xs.data() + j * l_, l_);
    for (std::size_t k = 0; k < l_; ++k) seg[k] = x[j * l_ + k];
    plan_->forward(seg, &mults);
  }

  const auto& k = simd::active();
  RealVector y(rows());
  std::vector<fft::Complex> acc(l_);
  double imag_max = 0.0;
  for (std::size_t i = 0; i < p_; ++i) {
    std::fill(acc.begin(), acc.end(), fft::Complex{});
    for (std::size_t j = 0; j < q_; ++j) {
      k.cmul_acc(reinterpret_cast<const double*>(spectra_.data() + (i * q_ + j) * l_),
                 reinterpret_cast<const double*>(xs.data() + j * l_),
                 reinterpret_cast<double*>(acc.data()), l_);
      mults += 4 * l_;
    }
    plan_->inverse(acc, &mults);
    for (std::size_t r = 0; r < l_; ++r) {
      y[i * l_ + r] = acc[r].real();
      imag_max = std::max(imag_max, std::abs(acc[r].imag()));
    }
  }

  // Residue bound: relative to |y|, with a floor for exact cancellation.
  const double tol = 1e-9 * norm2(y) + 1e-12 * weight_scale_ * norm2(x) * double(l_);
  if (imag_max > tol)
    throw NumericalError("bcm_matvec_fft: imaginary residue " + std::to_string(imag_max) +
                         " exceeds tolerance " + std::to_string(tol));
  if (counter) counter->real_multiplies += mults;
  return y;
}

std::vector<RealVector> partition_vector(std::span<const double> x, std::size_t l) {
  if (l == 0 || x.size() % l != 0)
    throw DimensionError("partition_vector: length " + std::to_string(x.size()) +
                         " is not divisible by " + std::to_string(l));
  std::vector<RealVector> parts;
  parts.reserve(x.size() / l);
  for (std::size_t s = 0; s < x.size(); s += l) parts.emplace_back(x.begin() + s, x.begin() + s + l);
  return parts;
}

RealVector pad_to_multiple(std::span<const double> x, std::size_t l) {
  if (l == 0) throw DimensionError("pad_to_multiple: order must be positive");
  const std::size_t n = (x.size() + l - 1) / l * l;
  RealVector out(n, 0.0);
  std::copy(x.begin(), x.end(), out.begin());
  return out;
}

BlockCirculantMatrix bcm_transpose(const BlockCirculantMatrix& w) {
  const std::size_t l = w.order();
  BlockCirculantMatrix t(w.block_cols(), w.block_rows(), l);
  for (std::size_t i = 0; i < w.block_rows(); ++i)
    for (std::size_t j = 0; j < w.block_cols(); ++j) {
      auto src = w.block(i, j);
      auto dst = t.block(j, i);
      for (std::size_t k = 0; k < l; ++k) dst[k] = src[(l - k) % l];
    }
  return t;
}

BlockCirculantMatrix bcm_project(const DenseMatrix& dense, std::size_t l) {
  if (l == 0 || dense.rows() % l != 0 || dense.cols() % l != 0)
    throw DimensionError("bcm_project: " + std::to_string(dense.rows()) + "x" +
                         std::to_string(dense.cols()) + " is not divisible by order " +
                         std::to_string(l));
  require_finite(dense.data(), "bcm_project");
  BlockCirculantMatrix w(dense.rows() / l, dense.cols() / l, l);
  for (std::size_t bi = 0; bi < w.block_rows(); ++bi)
    for (std::size_t bj = 0; bj < w.block_cols(); ++bj) {
      auto b = w.block(bi, bj);
      for (std::size_t k = 0; k < l; ++k) {
        double s = 0.0;
        for (std::size_t r = 0; r < l; ++r) s += dense(bi * l + r, bj * l + (r + k) % l);
        b[k] = s / double(l);
      }
    }
  return w;
}

ParamCount count_params(const BlockCirculantMatrix& w) {
  ParamCount c;
  c.independent = w.stored_scalars();
  c.dense_equivalent = std::uint64_t(w.rows()) * w.cols();
  c.ratio = double(c.independent) / double(c.dense_equivalent);
  return c;
}

ExtendedKernel circulant_extend_kernel(std::span<const double> flat_kernel, std::size_t l,
                                       std::size_t target_column) {
  if (l < 1) throw DimensionError("circulant_extend_kernel: order must be >= 1");
  if (flat_kernel.empty()) throw DimensionError("circulant_extend_kernel: empty kernel");
  if (target_column >= l) throw DimensionError("circulant_extend_kernel: target column out of range");
  require_finite(flat_kernel, "circulant_extend_kernel");
  const RealVector padded = pad_to_multiple(flat_kernel, l);
  const std::size_t p = padded.size() / l;
  ExtendedKernel ext{BlockCirculantMatrix(p, 1, l), target_column, flat_kernel.size(),
                     padded.size() - flat_kernel.size()};
  // Column t of block i must read padded[i*l + r] at row r:
  // w[(t - r) mod l] = padded[i*l + r]  =>  w[j] = padded[i*l + (t - j) mod l].
  for (std::size_t i = 0; i < p; ++i) {
    auto b = ext.bcm.block(i, 0);
    for (std::size_t j = 0; j < l; ++j) b[j] = padded[i * l + (target_column + l - j) % l];
  }
  return ext;
}

double extended_dot(const ExtendedKernel& ext, std::span<const double> x) {
  if (x.size() > ext.bcm.rows())
    throw DimensionError("extended_dot: input longer than the extended kernel");
  const RealVector xp = pad_to_multiple(x, ext.bcm.order());
  RealVector full(ext.bcm.rows(), 0.0);
  std::copy(xp.begin(), xp.end(), full.begin());
  const RealVector y = bcm_matvec_direct(bcm_transpose(ext.bcm), full);
  return y[ext.target_column];
}

}  // namespace cirptc::circulant
