#pragma once

// Seeded generators for desk-scale experiments. Images are in [0, 1].

#include <cstdint>

#include "cirptc/conv_lowering.hpp"
#include "cirptc/dataset.hpp"

namespace cirptc::data {

struct DigitStyle {
  double noise = 0.15;        // additive Gaussian pixel noise
  double max_rotation = 0.25; // radians
  double min_scale = 2.6, max_scale = 3.6;
  double max_shift = 3.0;     // pixels
};

// 28 x 28 glyphs of 0..9 from a 5 x 7 bitmap font under random affine jitter,
// stroke intensity and pixel noise.
Dataset synthetic_digits(std::size_t count, std::uint64_t seed, const DigitStyle& style = {});

// 3 x 32 x 32 images of 10 classes: colored shapes over textured backgrounds.
Dataset synthetic_color(std::size_t count, std::uint64_t seed);

// 1 x 28 x 28 chest-radiograph-like images of 3 classes (0 clear, 1 diffuse
// opacity, 2 lobar consolidation) for the sensitivity/specificity path.
Dataset synthetic_xray(std::size_t count, std::uint64_t seed);

// Smooth test scene with edges for the convolution demos.
conv::ImageTensor test_scene(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed);

}  // namespace cirptc::data
