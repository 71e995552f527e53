#pragma once

// im2col lowering of valid-mode, stride-1 convolutions (DNN cross-correlation
// convention, no kernel flip), plus the two full-range weight decompositions
// used to run signed weights on a nonnegative optical crossbar.

#include <cstddef>
#include <span>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/linalg.hpp"

namespace cirptc::conv {

struct ImageTensor {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<double> data;  // channel-major, then row, then column

  ImageTensor() = default;
  ImageTensor(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0);
  ImageTensor(std::size_t c, std::size_t h, std::size_t w, std::vector<double> values);

  double& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
};

// C_out kernels of k x k x C_in weights, stored [out][in][row][col].
struct KernelSet {
  std::size_t out_channels = 0, in_channels = 0, k = 0;
  std::vector<double> data;

  KernelSet() = default;
  KernelSet(std::size_t out, std::size_t in, std::size_t k, std::vector<double> values);

  double at(std::size_t o, std::size_t c, std::size_t r, std::size_t s) const {
    return data[((o * in_channels + c) * k + r) * k + s];
  }
};

// Position of window element (channel, row, col) in a flattened patch.
enum class FlattenOrder { channel_major, spatial_major };

struct FlattenLayout {
  FlattenOrder order = FlattenOrder::channel_major;

  std::size_t index(std::size_t c, std::size_t r, std::size_t s, std::size_t k,
                    std::size_t in_channels) const {
    return order == FlattenOrder::channel_major ? (c * k + r) * k + s
                                                : (r * k + s) * in_channels + c;
  }
};

// The one layout shared by lower_kernels and im2col.
inline constexpr FlattenLayout kFlattenLayout{FlattenOrder::channel_major};

struct LoweredConv {
  DenseMatrix weights;  // C_out x (k*k*C_in)
  std::size_t out_channels = 0, in_channels = 0, k = 0;
  FlattenLayout layout = kFlattenLayout;

  std::size_t patch_size() const { return k * k * in_channels; }
  std::size_t column_count(std::size_t h, std::size_t w) const { return (h - k + 1) * (w - k + 1); }
};

LoweredConv lower_kernels(const KernelSet& kernels, FlattenLayout layout = kFlattenLayout);
KernelSet unlower_kernels(const LoweredConv& lowered);

// (k*k*C) x ((h-k+1)(w-k+1)); column p is the patch at output position p in
// row-major sweep order.
DenseMatrix im2col(const ImageTensor& img, std::size_t k, FlattenLayout layout = kFlattenLayout);

// Shared-kernel layout: every channel is convolved with the same 2-D kernel,
// so channels are stacked along columns: k^2 x (C (h-k+1)(w-k+1)), column
// index c * positions + p.
DenseMatrix im2col_shared(const ImageTensor& img, std::size_t k);

// Textbook valid-mode cross-correlation. Oracle for every lowered path.
ImageTensor conv_direct(const ImageTensor& img, const KernelSet& kernels);

// reshape(W2d * im2col(img)).
ImageTensor conv_lowered(const ImageTensor& img, const LoweredConv& lowered);

// Applies a BCM (rows/cols padded to multiples of its order) to every
// zero-padded im2col column and keeps the first C_out rows.
ImageTensor conv_via_bcm(const ImageTensor& img, const circulant::BlockCirculantMatrix& w,
                         const LoweredConv& meta);

// C_out x positions -> C_out x oh x ow.
ImageTensor columns_to_image(const DenseMatrix& y, std::size_t out_h, std::size_t out_w);

struct SignSplit {
  DenseMatrix positive;  // max(W, 0)
  DenseMatrix negative;  // max(-W, 0)
};

SignSplit sign_split(const DenseMatrix& w);

// W mapped into [0, 1] through an offset, with a constant reference matrix
// holding the encoding of 0. W x = range * (W_shifted x - W_reference x).
struct BiasShift {
  DenseMatrix shifted;
  DenseMatrix reference;
  double offset = 0.0;  // value encoded as 0
  double range = 1.0;
  // Constant W: only the reference pass is meaningful and W x = constant * (ones x).
  bool degenerate = false;
  double constant = 0.0;
};

BiasShift bias_shift(const DenseMatrix& w);

RealVector bias_recover(const BiasShift& meta, std::span<const double> out_shifted,
                        std::span<const double> out_reference);

}  // namespace cirptc::conv
