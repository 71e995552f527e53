#include <doctest.h>

#include <algorithm>
#include <vector>

#include "cirptc/fft.hpp"
#include "support/random.hpp"

using cirptc::fft::Complex;

TEST_CASE("fft matches naive dft for power-of-two and arbitrary lengths") {
  testing_support::Gen g(11);
  for (std::size_t n = 1; n <= 40; ++n) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {g.uniform(), g.uniform()};
    const cirptc::fft::FftPlan plan(n);
    for (bool inv : {false, true}) {
      auto y = x;
      inv ? plan.inverse(y) : plan.forward(y);
      auto ref = cirptc::fft::naive_dft(x, inv);
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(y[i] - ref[i]));
      CHECK_MESSAGE(err < 1e-11, "n=" << n << " inverse=" << inv);
    }
  }
}

TEST_CASE("forward then inverse round-trips") {
  testing_support::Gen g(12);
  for (std::size_t n : {3u, 8u, 12u, 64u, 100u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {g.uniform(), g.uniform()};
    const cirptc::fft::FftPlan plan(n);
    auto y = x;
    plan.forward(y);
    plan.inverse(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("multiply counter grows like n log n for powers of two") {
  std::uint64_t m64 = 0, m1024 = 0;
  std::vector<Complex> a(64), b(1024);
  cirptc::fft::FftPlan(64).forward(a, &m64);
  cirptc::fft::FftPlan(1024).forward(b, &m1024);
  CHECK(m64 > 0);
  // n log n ratio is 16 * 10/6 = 26.7; n^2 would be 256.
  const double ratio = static_cast<double>(m1024) / static_cast<double>(m64);
  CHECK(ratio > 20.0);
  CHECK(ratio < 35.0);
}

TEST_CASE("is_power_of_two") {
  CHECK(cirptc::fft::is_power_of_two(1));
  CHECK(cirptc::fft::is_power_of_two(64));
  CHECK_FALSE(cirptc::fft::is_power_of_two(0));
  CHECK_FALSE(cirptc::fft::is_power_of_two(12));
}
