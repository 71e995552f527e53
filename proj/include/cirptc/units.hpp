#pragma once

// Unit-tagged scalars for the analytical model. Only dimensionally valid
// combinations compile.

#include <compare>
#include <limits>

namespace cirptc::units {

template <class Tag>
struct Quantity {
  double value = 0.0;

  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value(v) {}
  constexpr Quantity operator+(Quantity o) const { return Quantity(value + o.value); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(value - o.value); }
  constexpr Quantity& operator+=(Quantity o) {
    value += o.value;
    return *this;
  }
  constexpr Quantity operator*(double s) const { return Quantity(value * s); }
  constexpr Quantity operator/(double s) const { return Quantity(value / s); }
  constexpr double operator/(Quantity o) const { return value / o.value; }
  constexpr auto operator<=>(const Quantity&) const = default;
};

template <class Tag>
constexpr Quantity<Tag> operator*(double s, Quantity<Tag> q) {
  return q * s;
}

using Watts = Quantity<struct WattsTag>;
using Joules = Quantity<struct JoulesTag>;
using Hertz = Quantity<struct HertzTag>;
using Seconds = Quantity<struct SecondsTag>;
using SquareMm = Quantity<struct SquareMmTag>;
using Decibels = Quantity<struct DecibelsTag>;
using OpsPerSecond = Quantity<struct OpsTag>;

constexpr Watts operator*(Joules e, Hertz f) { return Watts(e.value * f.value); }
constexpr Watts operator*(Hertz f, Joules e) { return e * f; }
constexpr Hertz operator/(double n, Seconds t) { return Hertz(n / t.value); }

// TOPS/W and TOPS/mm^2.
constexpr double tops_per_watt(OpsPerSecond ops, Watts p) { return ops.value / p.value / 1e12; }
constexpr double tops_per_mm2(OpsPerSecond ops, SquareMm a) { return ops.value / a.value / 1e12; }

}  // namespace cirptc::units
