#include <doctest.h>

#include "cirptc/conv_lowering.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/formats.hpp"
#include "cirptc/photonic_conv.hpp"
#include "cirptc/synthetic.hpp"

using namespace cirptc;
using namespace cirptc::sim;

namespace {

// Direct convolution of the quantized image with the quantized kernel, per channel.
conv::ImageTensor quantized_reference(const conv::ImageTensor& img, std::span<const double> kernel,
                                      const TileConfig& cfg) {
  double m = 0.0;
  bool negative = false;
  for (double v : kernel) m = std::max(m, std::abs(v)), negative |= v < 0.0;
  std::vector<double> kq(kernel.size());
  const quant::QuantSpec sym = quant::symmetric_spec(kernel, cfg.weight_quant.bits);
  for (std::size_t i = 0; i < kq.size(); ++i)
    kq[i] = negative ? quant::quantize(kernel[i], sym) : quant::quantize(kernel[i] / m, cfg.weight_quant) * m;
  conv::ImageTensor out;
  for (std::size_t c = 0; c < img.channels; ++c) {
    conv::ImageTensor one(1, img.height, img.width);
    for (std::size_t i = 0; i < img.height * img.width; ++i)
      one.data[i] = quant::quantize(img.data[c * img.height * img.width + i], cfg.input_quant);
    const auto y = conv::conv_direct(one, conv::KernelSet(1, 1, 3, kq));
    if (c == 0) out = conv::ImageTensor(img.channels, y.height, y.width);
    std::copy(y.data.begin(), y.data.end(), out.data.begin() + long(c * y.data.size()));
  }
  return out;
}

}  // namespace

TEST_CASE("noiseless photonic blur equals the quantized direct convolution") {
  const auto img = data::test_scene(3, 16, 16, 2024);
  TileConfig cfg = folded_tile(prototype_tile(), 3);
  const auto r = convolve_photonic(img, kBlurKernel, 3, cfg, 1);
  const auto ref = quantized_reference(img, kBlurKernel, cfg);
  CHECK(r.tile_passes == 3 * 14 * 14);
  CHECK(max_abs_diff(r.ideal.data, ref.data) < 1e-12);
  const double lsb = r.weight_scale * output_lsb(cfg);
  CHECK(max_abs_diff(r.simulated.data, r.ideal.data) <= 0.5 * lsb);
  // As 8-bit images the two agree to within one grey level.
  const auto a = io::to_gray8(r.simulated.data, 0.0, 1.0), b = io::to_gray8(ref.data, 0.0, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(int(a[i]) - int(b[i])) <= 1);
}

TEST_CASE("signed kernels use two passes") {
  const auto img = data::test_scene(1, 10, 10, 3);
  const TileConfig cfg = folded_tile(prototype_tile(), 3);
  const auto r = convolve_photonic(img, kSobelKernel, 3, cfg, 1);
  CHECK(r.signed_kernel);
  CHECK(r.tile_passes == 2 * 8 * 8);
  CHECK(max_abs_diff(r.simulated.data, quantized_reference(img, kSobelKernel, cfg).data) < 1e-8);
}

TEST_CASE("photonic convolution input checks") {
  const auto img = data::test_scene(1, 10, 10, 3);
  CHECK_THROWS_AS(convolve_photonic(img, kBlurKernel, 3, prototype_tile(), 1), ConfigError);
  auto bad = img;
  bad.data[5] = 1.5;
  CHECK_THROWS_AS(convolve_photonic(bad, kBlurKernel, 3, folded_tile(prototype_tile(), 3), 1), DomainError);
  CHECK(folds_for_kernel(3, 4) == 3);
  CHECK(folds_for_kernel(5, 4) == 7);
}

TEST_CASE("calibrated deviation reproduces the target error") {
  const auto img = data::test_scene(3, 16, 16, 7);
  TileConfig cfg = folded_tile(prototype_tile(), 3);
  cfg.crosstalk_on = true;
  const double s = calibrate_sigma_rel(cfg, img, kBlurKernel, 3, 0.03, 4);
  cfg.noise = {s, 0, true};
  CHECK(mean_normalized_rmse(img, kBlurKernel, 3, cfg, 4) == doctest::Approx(0.03).epsilon(1e-3));
  // Larger deviation, larger error.
  cfg.noise.sigma_rel = 2 * s;
  CHECK(mean_normalized_rmse(img, kBlurKernel, 3, cfg, 4) > 0.03);
}
