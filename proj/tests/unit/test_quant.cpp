#include <doctest.h>

#include "cirptc/quant.hpp"
#include "support/random.hpp"

using namespace cirptc;
using testing_support::Gen;

TEST_CASE("quantizer endpoints and the 4-bit midpoint") {
  const quant::QuantSpec q{4, 0.0, 1.0};
  CHECK(quant::quantize(0.0, q) == 0.0);
  CHECK(quant::quantize(1.0, q) == 1.0);
  // Levels k/15: 0.5 = 7.5 level units, rounded away from zero to 8.
  CHECK(quant::quantize(0.5, q) == doctest::Approx(8.0 / 15.0).epsilon(1e-15));
  CHECK(quant::quantize(-3.0, q) == 0.0);
  CHECK(quant::quantize(7.0, q) == 1.0);
}

TEST_CASE("quantizer is idempotent and lands on the codebook") {
  Gen g(11);
  for (int bits : {1, 2, 4, 6, 8}) {
    const quant::QuantSpec q{bits, -0.7, 1.3};
    for (int i = 0; i < 500; ++i) {
      const double x = g.uniform(-2.0, 2.0);
      const double y = quant::quantize(x, q);
      CHECK(quant::quantize(y, q) == y);
      CHECK(quant::on_codebook(y, q));
      CHECK(quant::from_code(quant::code(y, q), q) == y);
    }
  }
}

TEST_CASE("straight-through gradient passes inside the range only") {
  const quant::QuantSpec q{4, 0.0, 2.0};
  CHECK(quant::ste_grad(1.0, q) == 1.0);
  CHECK(quant::ste_grad(0.0, q) == 1.0);
  CHECK(quant::ste_grad(2.0, q) == 1.0);
  CHECK(quant::ste_grad(-0.1, q) == 0.0);
  CHECK(quant::ste_grad(2.5, q) == 0.0);
}

TEST_CASE("symmetric grid covers the largest magnitude") {
  const std::vector<double> w{0.25, -0.5, 0.1};
  const auto q = quant::symmetric_spec(w, 6);
  CHECK(q.lo == -0.5);
  CHECK(q.hi == 0.5);
  CHECK(quant::quantize(-0.5, q) == -0.5);
  const std::vector<double> zero(4, 0.0);
  CHECK(quant::symmetric_spec(zero, 6).hi == 1.0);
}
