#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/conv_lowering.hpp"
#include "cirptc/errors.hpp"
#include "support/random.hpp"

using namespace cirptc;
using namespace cirptc::conv;
using testing_support::Gen;

namespace {

ImageTensor random_image(Gen& g, std::size_t c, std::size_t h, std::size_t w) {
  return ImageTensor(c, h, w, g.vec(c * h * w));
}

KernelSet random_kernels(Gen& g, std::size_t o, std::size_t c, std::size_t k) {
  return KernelSet(o, c, k, g.vec(o * c * k * k));
}

double max_diff(const ImageTensor& a, const ImageTensor& b) {
  REQUIRE(a.channels == b.channels);
  REQUIRE(a.height == b.height);
  REQUIRE(a.width == b.width);
  return max_abs_diff(a.data, b.data);
}

}  // namespace

TEST_CASE("lower_kernels shapes and round trip") {
  Gen g(1);
  const auto one = lower_kernels(KernelSet(1, 1, 1, {2.0}));
  CHECK(one.weights.rows() == 1);
  CHECK(one.weights.cols() == 1);
  const auto ks = random_kernels(g, 5, 3, 3);
  const auto lc = lower_kernels(ks);
  CHECK(lc.weights.rows() == 5);
  CHECK(lc.weights.cols() == 27);
  CHECK(unlower_kernels(lc).data == ks.data);
  // channel-major flattening
  CHECK(lc.weights(2, 9 * 1 + 3 * 2 + 0) == ks.at(2, 1, 2, 0));
}

TEST_CASE("im2col indexing") {
  Gen g(2);
  const auto img = random_image(g, 1, 4, 4);
  const DenseMatrix cols = im2col(img, 3);
  CHECK(cols.rows() == 9);
  CHECK(cols.cols() == 4);
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t s = 0; s < 3; ++s) CHECK(cols(r * 3 + s, p) == img.at(0, p / 2 + r, p % 2 + s));

  const auto rgb = random_image(g, 3, 5, 6);
  const DenseMatrix flat = im2col(rgb, 1);
  CHECK(flat.rows() == 3);
  CHECK(flat.cols() == 30);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < 30; ++p) CHECK(flat(c, p) == rgb.data[c * 30 + p]);

  CHECK_THROWS_AS(im2col(rgb, 6), DimensionError);
}

TEST_CASE("shared-kernel blur layout is 9 x 2700 for a 32x32 RGB image") {
  Gen g(3);
  const auto img = random_image(g, 3, 32, 32);
  const DenseMatrix cols = im2col_shared(img, 3);
  CHECK(cols.rows() == 9);
  CHECK(cols.cols() == 2700);
  CHECK(cols(4, 900 + 0) == img.at(1, 1, 1));
}

TEST_CASE("conv_direct small cases") {
  Gen g(4);
  const auto img = random_image(g, 2, 4, 5);
  const auto ident = conv_direct(img, KernelSet(1, 2, 1, {1.0, 1.0}));
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 5; ++x) CHECK(ident.at(0, y, x) == img.at(0, y, x) + img.at(1, y, x));
  const auto zero = conv_direct(img, KernelSet(2, 2, 3, std::vector<double>(36, 0.0)));
  CHECK(max_abs(zero.data) == 0.0);

  const auto one = random_image(g, 1, 5, 5);
  const auto k = random_kernels(g, 1, 1, 3);
  const auto out = conv_direct(one, k);
  CHECK(out.height == 3);
  const double unrolled = k.data[0] * one.at(0, 1, 2) + k.data[1] * one.at(0, 1, 3) +
                          k.data[2] * one.at(0, 1, 4) + k.data[3] * one.at(0, 2, 2) +
                          k.data[4] * one.at(0, 2, 3) + k.data[5] * one.at(0, 2, 4) +
                          k.data[6] * one.at(0, 3, 2) + k.data[7] * one.at(0, 3, 3) +
                          k.data[8] * one.at(0, 3, 4);
  CHECK(out.at(0, 1, 2) == doctest::Approx(unrolled).epsilon(1e-14));
  CHECK_THROWS_AS(conv_direct(one, random_kernels(g, 1, 2, 3)), DimensionError);
}

TEST_CASE("lowered convolution equals direct convolution across shapes") {
  Gen g(5);
  int shapes = 0;
  for (std::size_t k = 1; k <= 7; k += 2)
    for (std::size_t c = 1; c <= 4; ++c)
      for (std::size_t h = k; h <= 12; h += 3) {
        const std::size_t w = std::min<std::size_t>(12, h + 1);
        const auto img = random_image(g, c, h, w);
        const auto ks = random_kernels(g, 3, c, k);
        CHECK(max_diff(conv_lowered(img, lower_kernels(ks)), conv_direct(img, ks)) < 1e-12);
        ++shapes;
      }
  CHECK(shapes > 30);
}

TEST_CASE("mismatched flattening orders break equivalence") {
  Gen g(6);
  const auto img = random_image(g, 3, 6, 6);
  const auto ks = random_kernels(g, 2, 3, 3);
  auto lc = lower_kernels(ks, FlattenLayout{FlattenOrder::spatial_major});
  CHECK(max_diff(conv_lowered(img, lc), conv_direct(img, ks)) < 1e-12);
  // Kernels flattened one way, patches the other.
  const DenseMatrix cols = im2col(img, 3, kFlattenLayout);
  const auto wrong = columns_to_image(matmul(lc.weights, cols), 4, 4);
  CHECK(max_diff(wrong, conv_direct(img, ks)) > 1e-3);
}

TEST_CASE("conv_via_bcm matches direct convolution for block-circulant weights") {
  Gen g(7);
  // C_in = 2, k = 2 -> 8 patch rows; C_out = 4; l = 4.
  const circulant::BlockCirculantMatrix w(1, 2, 4, g.vec(8));
  const DenseMatrix dense = circulant::bcm_expand(w);
  LoweredConv lc;
  lc.out_channels = 4;
  lc.in_channels = 2;
  lc.k = 2;
  lc.weights = dense;
  const auto ks = unlower_kernels(lc);
  const auto img = random_image(g, 2, 7, 9);
  const auto out = conv_via_bcm(img, w, lc);
  CHECK(out.height * out.width == 6u * 8u);
  CHECK(max_diff(out, conv_direct(img, ks)) < 1e-12);

  // Identity BCM, k = 1: feature maps are the input channels.
  circulant::BlockCirculantMatrix id(1, 1, 4);
  id.block(0, 0)[0] = 1.0;
  LoweredConv meta;
  meta.out_channels = 4;
  meta.in_channels = 4;
  meta.k = 1;
  const auto img4 = random_image(g, 4, 5, 5);
  CHECK(max_diff(conv_via_bcm(img4, id, meta), img4) < 1e-14);
  CHECK_THROWS_AS(conv_via_bcm(img, id, lc), DimensionError);
}

TEST_CASE("arbitrary kernel through the extended column reproduces blur") {
  Gen g(8);
  const std::vector<double> blur(9, 1.0 / 16.0);
  auto img = random_image(g, 1, 32, 32);
  for (auto& v : img.data) v = std::round(v * 8.0) / 8.0;
  const auto ext = circulant::circulant_extend_kernel(blur, 4);
  const DenseMatrix cols = im2col(img, 3);
  const auto ref = conv_direct(img, KernelSet(1, 1, 3, blur));
  for (std::size_t p = 0; p < cols.cols(); ++p) {
    RealVector x(9);
    for (std::size_t r = 0; r < 9; ++r) x[r] = cols(r, p);
    CHECK(circulant::extended_dot(ext, x) == ref.data[p]);
  }
}

TEST_CASE("sign split") {
  Gen g(9);
  const DenseMatrix pos(2, 2, {1, 2, 3, 0});
  CHECK(max_abs(sign_split(pos).negative.data()) == 0.0);
  DenseMatrix neg_id(3, 3);
  for (std::size_t i = 0; i < 3; ++i) neg_id(i, i) = -1.0;
  const auto s = sign_split(neg_id);
  CHECK(max_abs(s.positive.data()) == 0.0);
  CHECK(s.negative == DenseMatrix::identity(3));

  const DenseMatrix sobel(1, 9, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
  const auto ss = sign_split(sobel);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = g.vec(9, 0.0, 1.0);
    const double y = matvec(sobel, x)[0];
    CHECK(matvec(ss.positive, x)[0] - matvec(ss.negative, x)[0] == doctest::Approx(y).epsilon(1e-14));
  }
  for (std::size_t i = 0; i < 9; ++i) CHECK(ss.positive.data()[i] - ss.negative.data()[i] == sobel.data()[i]);
}

TEST_CASE("bias shift reconstructs signed products") {
  Gen g(10);
  for (int rep = 0; rep < 50; ++rep) {
    const DenseMatrix w(4, 6, g.vec(24, -2.0, 1.5));
    const auto b = bias_shift(w);
    CHECK_FALSE(b.degenerate);
    for (double v : b.shifted.data()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto x = g.vec(6, 0.0, 1.0);
    const auto ys = matvec(b.shifted, x), yr = matvec(b.reference, x);
    const auto y = bias_recover(b, ys, yr);
    CHECK(max_abs_diff(y, matvec(w, x)) < 1e-12);
    // A constant offset added to both passes cancels.
    RealVector ys2 = ys, yr2 = yr;
    for (auto& v : ys2) v += 0.125;
    for (auto& v : yr2) v += 0.125;
    CHECK(max_abs_diff(bias_recover(b, ys2, yr2), y) < 1e-12);
  }

  const DenseMatrix unit(2, 2, {0.0, 0.25, 1.0, 0.5});
  const auto bu = bias_shift(unit);
  CHECK(bu.shifted == unit);
  CHECK(bu.offset == 0.0);

  const auto deg = bias_shift(DenseMatrix(2, 3, 0.7));
  CHECK(deg.degenerate);
  const RealVector x{1, 2, 3};
  const auto y = bias_recover(deg, matvec(deg.shifted, x), matvec(deg.reference, x));
  CHECK(y[0] == doctest::Approx(0.7 * 6.0));
}
