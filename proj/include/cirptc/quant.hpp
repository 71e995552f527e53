#pragma once

// Uniform quantization onto 2^bits levels spanning [lo, hi]. Values are
// clamped into range, then rounded half away from zero in level units.

#include <cstdint>
#include <span>
#include <vector>

namespace cirptc::quant {

struct QuantSpec {
  int bits = 8;
  double lo = 0.0;
  double hi = 1.0;

  void validate() const;
  std::uint32_t levels() const { return (std::uint32_t{1} << bits); }
  double step() const { return (hi - lo) / double(levels() - 1); }
  bool operator==(const QuantSpec&) const = default;
};

std::uint32_t code(double x, const QuantSpec& s);
double from_code(std::uint32_t c, const QuantSpec& s);
double quantize(double x, const QuantSpec& s);
std::vector<double> quantize(std::span<const double> x, const QuantSpec& s);

// Inside [lo, hi] up to rounding noise, and on a codebook level.
bool on_codebook(double x, const QuantSpec& s);

// Straight-through estimator: d quantize / dx = 1 inside [lo, hi], 0 outside.
double ste_grad(double x, const QuantSpec& s);

// Symmetric signed grid [-m, m] with 2^bits levels, m = max |w| (m = 1 if w is all zero).
QuantSpec symmetric_spec(std::span<const double> w, int bits);

}  // namespace cirptc::quant
