#include "cirptc/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "cirptc/errors.hpp"

namespace cirptc::data {

namespace {

// 5 x 7 glyphs, one string per row, '#' = ink.
constexpr std::array<std::array<const char*, 7>, 10> kFont{{
    {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "},
    {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "},
    {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"},
    {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "},
    {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "},
    {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "},
    {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "},
    {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "},
    {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "},
    {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "},
}};

double glyph(int digit, double u, double v) {
  // Bilinear sample of the bitmap with cell centers at integer coordinates.
  auto ink = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x > 4 || y > 6) return 0.0;
    return kFont[std::size_t(digit)][std::size_t(y)][x] == '#' ? 1.0 : 0.0;
  };
  const int x0 = int(std::floor(u)), y0 = int(std::floor(v));
  const double fx = u - x0, fy = v - y0;
  return (1 - fx) * (1 - fy) * ink(x0, y0) + fx * (1 - fy) * ink(x0 + 1, y0) + (1 - fx) * fy * ink(x0, y0 + 1) +
         fx * fy * ink(x0 + 1, y0 + 1);
}

Dataset empty_set(std::size_t c, std::size_t h, std::size_t w, std::size_t classes, std::size_t count) {
  Dataset d;
  d.channels = c;
  d.height = h;
  d.width = w;
  d.classes = classes;
  d.images.assign(count * c * h * w, 0.0);
  d.labels.assign(count, 0);
  return d;
}

}  // namespace

Dataset synthetic_digits(std::size_t count, std::uint64_t seed, const DigitStyle& style) {
  Dataset d = empty_set(1, 28, 28, 10, count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const int digit = int(rng() % 10);
    d.labels[i] = digit;
    const double angle = style.max_rotation * (2 * u01(rng) - 1);
    const double scale = style.min_scale + (style.max_scale - style.min_scale) * u01(rng);
    const double aspect = 0.85 + 0.3 * u01(rng);
    const double shear = 0.3 * (2 * u01(rng) - 1);
    const double dx = style.max_shift * (2 * u01(rng) - 1), dy = style.max_shift * (2 * u01(rng) - 1);
    const double ink = 0.6 + 0.4 * u01(rng);
    const double thickness = 0.25 + 0.2 * u01(rng);
    const double ca = std::cos(angle), sa = std::sin(angle);
    auto img = std::span<double>(d.images).subspan(i * 784, 784);
    for (int y = 0; y < 28; ++y)
      for (int x = 0; x < 28; ++x) {
        // Inverse map from the pixel to glyph coordinates (glyph center 2, 3).
        const double px = x - 13.5 - dx, py = y - 13.5 - dy;
        const double rx = (ca * px + sa * py) / (scale * aspect), ry = (-sa * px + ca * py) / scale;
        const double g = glyph(digit, rx - shear * ry + 2.0, ry + 3.0);
        const double stroke = std::clamp((g - (0.5 - thickness)) / (2 * thickness), 0.0, 1.0);
        img[std::size_t(y * 28 + x)] = std::clamp(ink * stroke + style.noise * normal(rng), 0.0, 1.0);
      }
  }
  return d;
}

Dataset synthetic_color(std::size_t count, std::uint64_t seed) {
  Dataset d = empty_set(3, 32, 32, 10, count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = int(rng() % 10);
    d.labels[i] = cls;
    const int shape = cls % 5;  // disk, square, ring, bar, cross
    const bool warm = cls >= 5;
    const double cx = 16 + 5 * (2 * u01(rng) - 1), cy = 16 + 5 * (2 * u01(rng) - 1);
    const double size = 6 + 4 * u01(rng);
    const std::array<double, 3> fg = warm ? std::array<double, 3>{0.8 + 0.2 * u01(rng), 0.3 * u01(rng), 0.2 * u01(rng)}
                                          : std::array<double, 3>{0.2 * u01(rng), 0.4 * u01(rng), 0.8 + 0.2 * u01(rng)};
    const std::array<double, 3> bg{0.3 + 0.3 * u01(rng), 0.3 + 0.3 * u01(rng), 0.3 + 0.3 * u01(rng)};
    const double freq = 0.2 + 0.5 * u01(rng), phase = 2 * std::numbers::pi * u01(rng);
    auto img = std::span<double>(d.images).subspan(i * 3072, 3072);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const double ux = x - cx, uy = y - cy, r = std::hypot(ux, uy);
        bool in = false;
        switch (shape) {
          case 0: in = r < size; break;
          case 1: in = std::abs(ux) < size * 0.8 && std::abs(uy) < size * 0.8; break;
          case 2: in = r < size && r > size * 0.55; break;
          case 3: in = std::abs(uy) < size * 0.35 && std::abs(ux) < size * 1.2; break;
          default: in = (std::abs(ux) < size * 0.3 || std::abs(uy) < size * 0.3) && r < size * 1.2; break;
        }
        const double tex = 0.1 * std::sin(freq * x + phase) * std::cos(freq * y);
        for (int c = 0; c < 3; ++c) {
          const double v = (in ? fg[std::size_t(c)] : bg[std::size_t(c)] + tex) + 0.05 * normal(rng);
          img[std::size_t((c * 32 + y) * 32 + x)] = std::clamp(v, 0.0, 1.0);
        }
      }
  }
  return d;
}

Dataset synthetic_xray(std::size_t count, std::uint64_t seed) {
  Dataset d = empty_set(1, 28, 28, 3, count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = int(rng() % 3);
    d.labels[i] = cls;
    const double lung_w = 5.0 + 1.5 * u01(rng), lung_h = 9.0 + 2.0 * u01(rng);
    const double spot_x = (u01(rng) < 0.5 ? 8.0 : 19.0) + 2 * (2 * u01(rng) - 1);
    const double spot_y = 12.0 + 6 * (2 * u01(rng) - 1);
    const double haze = 0.25 + 0.15 * u01(rng);
    auto img = std::span<double>(d.images).subspan(i * 784, 784);
    for (int y = 0; y < 28; ++y)
      for (int x = 0; x < 28; ++x) {
        // Bright body, two dark lung fields, a bright spine.
        double v = 0.75;
        for (double lx : {8.5, 18.5}) {
          const double e = std::pow((x - lx) / lung_w, 2) + std::pow((y - 13.5) / lung_h, 2);
          if (e < 1.0) v = 0.2 + 0.1 * e;
        }
        if (std::abs(x - 13.5) < 1.5) v = 0.9;
        if (cls == 1) v += haze * std::exp(-std::pow((y - 18.0) / 8.0, 2)) * (v < 0.5 ? 1.0 : 0.0);
        if (cls == 2) v += 0.45 * std::exp(-(std::pow(x - spot_x, 2) + std::pow(y - spot_y, 2)) / 8.0);
        img[std::size_t(y * 28 + x)] = std::clamp(v + 0.08 * normal(rng), 0.0, 1.0);
      }
  }
  return d;
}

conv::ImageTensor test_scene(std::size_t channels, std::size_t height, std::size_t width, std::uint64_t seed) {
  if (channels == 0 || height == 0 || width == 0) throw DimensionError("test_scene: empty image");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  conv::ImageTensor img(channels, height, width);
  const double cx = width * (0.3 + 0.4 * u01(rng)), cy = height * (0.3 + 0.4 * u01(rng));
  const double radius = std::min(height, width) * (0.2 + 0.1 * u01(rng));
  for (std::size_t c = 0; c < channels; ++c) {
    const double tint = 0.5 + 0.5 * u01(rng), gx = u01(rng), gy = u01(rng);
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        double v = 0.2 + 0.3 * (gx * x / double(width) + gy * y / double(height));
        if (std::hypot(x - cx, y - cy) < radius) v = tint;
        if (x > width * 3 / 4 && y < height / 3) v = 1.0 - v;
        img.at(c, y, x) = std::clamp(v, 0.0, 1.0);
      }
  }
  return img;
}

}  // namespace cirptc::data
