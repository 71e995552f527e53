#include "cirptc/conv_lowering.hpp"

#include <algorithm>
#include <string>

#include "cirptc/errors.hpp"
#include "cirptc/simd.hpp"

namespace cirptc::conv {

ImageTensor::ImageTensor(std::size_t c, std::size_t h, std::size_t w, double fill)
    : channels(c), height(h), width(w), data(c * h * w, fill) {
  if (c == 0 || h == 0 || w == 0) throw DimensionError("ImageTensor: dimensions must be positive");
}

ImageTensor::ImageTensor(std::size_t c, std::size_t h, std::size_t w, std::vector<double> values)
    : channels(c), height(h), width(w), data(std::move(values)) {
  if (c == 0 || h == 0 || w == 0) throw DimensionError("ImageTensor: dimensions must be positive");
  if (data.size() != c * h * w) throw DimensionError("ImageTensor: data length mismatch");
  require_finite(data, "ImageTensor");
}

KernelSet::KernelSet(std::size_t out, std::size_t in, std::size_t k_, std::vector<double> values)
    : out_channels(out), in_channels(in), k(k_), data(std::move(values)) {
  if (out == 0 || in == 0 || k_ == 0) throw DimensionError("KernelSet: dimensions must be positive");
  if (data.size() != out * in * k_ * k_) throw DimensionError("KernelSet: data length mismatch");
  require_finite(data, "KernelSet");
}

LoweredConv lower_kernels(const KernelSet& ks, FlattenLayout layout) {
  LoweredConv out;
  out.out_channels = ks.out_channels;
  out.in_channels = ks.in_channels;
  out.k = ks.k;
  out.layout = layout;
  out.weights = DenseMatrix(ks.out_channels, out.patch_size());
  for (std::size_t o = 0; o < ks.out_channels; ++o)
    for (std::size_t c = 0; c < ks.in_channels; ++c)
      for (std::size_t r = 0; r < ks.k; ++r)
        for (std::size_t s = 0; s < ks.k; ++s)
          out.weights(o, layout.index(c, r, s, ks.k, ks.in_channels)) = ks.at(o, c, r, s);
  return out;
}

KernelSet unlower_kernels(const LoweredConv& lc) {
  if (lc.weights.rows() != lc.out_channels || lc.weights.cols() != lc.patch_size())
    throw DimensionError("unlower_kernels: weight matrix does not match metadata");
  std::vector<double> data(lc.out_channels * lc.patch_size());
  const std::size_t k = lc.k, cin = lc.in_channels;
  for (std::size_t o = 0; o < lc.out_channels; ++o)
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t s = 0; s < k; ++s)
          data[((o * cin + c) * k + r) * k + s] = lc.weights(o, lc.layout.index(c, r, s, k, cin));
  return KernelSet(lc.out_channels, cin, k, std::move(data));
}

namespace {

void check_window(const ImageTensor& img, std::size_t k) {
  if (k == 0 || k > img.height || k > img.width)
    throw DimensionError("im2col: window " + std::to_string(k) + " exceeds image " +
                         std::to_string(img.height) + "x" + std::to_string(img.width));
}

}  // namespace

DenseMatrix im2col(const ImageTensor& img, std::size_t k, FlattenLayout layout) {
  check_window(img, k);
  const std::size_t oh = img.height - k + 1, ow = img.width - k + 1;
  DenseMatrix cols(k * k * img.channels, oh * ow);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t s = 0; s < k; ++s) {
        auto row = cols.row(layout.index(c, r, s, k, img.channels));
        for (std::size_t y = 0; y < oh; ++y)
          for (std::size_t x = 0; x < ow; ++x) row[y * ow + x] = img.at(c, y + r, x + s);
      }
  return cols;
}

DenseMatrix im2col_shared(const ImageTensor& img, std::size_t k) {
  check_window(img, k);
  const std::size_t oh = img.height - k + 1, ow = img.width - k + 1;
  const std::size_t positions = oh * ow;
  DenseMatrix cols(k * k, img.channels * positions);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t s = 0; s < k; ++s) {
        auto row = cols.row(r * k + s);
        for (std::size_t y = 0; y < oh; ++y)
          for (std::size_t x = 0; x < ow; ++x) row[c * positions + y * ow + x] = img.at(c, y + r, x + s);
      }
  return cols;
}

ImageTensor conv_direct(const ImageTensor& img, const KernelSet& ks) {
  if (ks.in_channels != img.channels)
    throw DimensionError("conv_direct: kernel has " + std::to_string(ks.in_channels) +
                         " input channels, image has " + std::to_string(img.channels));
  check_window(img, ks.k);
  const std::size_t k = ks.k, oh = img.height - k + 1, ow = img.width - k + 1;
  ImageTensor out(ks.out_channels, oh, ow);
  for (std::size_t o = 0; o < ks.out_channels; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double s = 0.0;
        for (std::size_t c = 0; c < img.channels; ++c)
          for (std::size_t r = 0; r < k; ++r)
            for (std::size_t q = 0; q < k; ++q) s += ks.at(o, c, r, q) * img.at(c, y + r, x + q);
        out.at(o, y, x) = s;
      }
  return out;
}

ImageTensor columns_to_image(const DenseMatrix& y, std::size_t out_h, std::size_t out_w) {
  if (y.cols() != out_h * out_w) throw DimensionError("columns_to_image: column count mismatch");
  return ImageTensor(y.rows(), out_h, out_w, std::vector<double>(y.data().begin(), y.data().end()));
}

ImageTensor conv_lowered(const ImageTensor& img, const LoweredConv& lc) {
  if (lc.in_channels != img.channels) throw DimensionError("conv_lowered: channel mismatch");
  const DenseMatrix cols = im2col(img, lc.k, lc.layout);
  return columns_to_image(matmul(lc.weights, cols), img.height - lc.k + 1, img.width - lc.k + 1);
}

ImageTensor conv_via_bcm(const ImageTensor& img, const circulant::BlockCirculantMatrix& w,
                         const LoweredConv& meta) {
  if (meta.in_channels != img.channels) throw DimensionError("conv_via_bcm: channel mismatch");
  const std::size_t l = w.order();
  const std::size_t padded_cols = (meta.patch_size() + l - 1) / l * l;
  const std::size_t padded_rows = (meta.out_channels + l - 1) / l * l;
  if (w.cols() != padded_cols || w.rows() != padded_rows)
    throw DimensionError("conv_via_bcm: BCM is " + std::to_string(w.rows()) + "x" +
                         std::to_string(w.cols()) + ", lowered layer needs " +
                         std::to_string(padded_rows) + "x" + std::to_string(padded_cols));
  const DenseMatrix cols = im2col(img, meta.k, meta.layout);
  const std::size_t oh = img.height - meta.k + 1, ow = img.width - meta.k + 1;
  const circulant::SpectralBcm spectral(w);
  DenseMatrix y(meta.out_channels, cols.cols());
  RealVector column(padded_cols, 0.0);
  for (std::size_t p = 0; p < cols.cols(); ++p) {
    for (std::size_t r = 0; r < cols.rows(); ++r) column[r] = cols(r, p);
    const RealVector out = spectral.apply(column);
    for (std::size_t o = 0; o < meta.out_channels; ++o) y(o, p) = out[o];
  }
  return columns_to_image(y, oh, ow);
}

SignSplit sign_split(const DenseMatrix& w) {
  require_finite(w.data(), "sign_split");
  SignSplit s{DenseMatrix(w.rows(), w.cols()), DenseMatrix(w.rows(), w.cols())};
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    const double v = w.data()[i];
    s.positive.data()[i] = v > 0.0 ? v : 0.0;
    s.negative.data()[i] = v < 0.0 ? -v : 0.0;
  }
  return s;
}

BiasShift bias_shift(const DenseMatrix& w) {
  require_finite(w.data(), "bias_shift");
  if (w.empty()) throw DimensionError("bias_shift: empty matrix");
  const auto [mn_it, mx_it] = std::minmax_element(w.data().begin(), w.data().end());
  const double mn = *mn_it, mx = *mx_it;
  BiasShift b;
  if (mx == mn) {
    b.degenerate = true;
    b.constant = mn;
    b.shifted = DenseMatrix(w.rows(), w.cols(), 0.0);
    b.reference = DenseMatrix(w.rows(), w.cols(), 1.0);
    return b;
  }
  // The encoded range always contains 0 so that the reference level is programmable.
  const double lo = std::min(mn, 0.0), hi = std::max(mx, 0.0);
  b.range = hi - lo;
  b.offset = -lo / b.range;
  b.shifted = DenseMatrix(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.data().size(); ++i) b.shifted.data()[i] = (w.data()[i] - lo) / b.range;
  b.reference = DenseMatrix(w.rows(), w.cols(), b.offset);
  return b;
}

RealVector bias_recover(const BiasShift& meta, std::span<const double> out_shifted,
                        std::span<const double> out_reference) {
  RealVector y(out_reference.size());
  if (meta.degenerate) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = meta.constant * out_reference[i];
    return y;
  }
  if (out_shifted.size() != out_reference.size())
    throw DimensionError("bias_recover: pass lengths differ");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = meta.range * (out_shifted[i] - out_reference[i]);
  return y;
}

}  // namespace cirptc::conv
