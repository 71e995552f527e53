#include "cirptc/quant.hpp"

#include <algorithm>
#include <cmath>

#include "cirptc/errors.hpp"
#include "cirptc/linalg.hpp"

namespace cirptc::quant {

void QuantSpec::validate() const {
  if (bits < 1 || bits > 24) throw ConfigError("QuantSpec: bits must be in [1, 24]");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("QuantSpec: need finite hi > lo");
}

std::uint32_t code(double x, const QuantSpec& s) {
  s.validate();
  if (!std::isfinite(x)) throw DomainError("quantize: non-finite value");
  const double clamped = std::clamp(x, s.lo, s.hi);
  // std::round rounds half away from zero; level units are nonnegative.
  const double level = std::round((clamped - s.lo) / s.step());
  return static_cast<std::uint32_t>(std::min(level, double(s.levels() - 1)));
}

double from_code(std::uint32_t c, const QuantSpec& s) {
  if (c >= s.levels()) throw DomainError("from_code: code out of range");
  if (c == s.levels() - 1) return s.hi;
  return s.lo + double(c) * s.step();
}

double quantize(double x, const QuantSpec& s) { return from_code(code(x, s), s); }

std::vector<double> quantize(std::span<const double> x, const QuantSpec& s) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = quantize(x[i], s);
  return out;
}

bool on_codebook(double x, const QuantSpec& s) {
  const double tol = 1e-9 * s.step();
  if (!(x >= s.lo - tol && x <= s.hi + tol)) return false;
  return std::abs(quantize(x, s) - x) <= tol;
}

double ste_grad(double x, const QuantSpec& s) { return (x >= s.lo && x <= s.hi) ? 1.0 : 0.0; }

QuantSpec symmetric_spec(std::span<const double> w, int bits) {
  double m = max_abs(w);
  if (m == 0.0) m = 1.0;
  return QuantSpec{bits, -m, m};
}

}  // namespace cirptc::quant
