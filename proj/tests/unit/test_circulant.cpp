#include <doctest.h>

#include <cmath>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/errors.hpp"
#include "support/random.hpp"

using namespace cirptc;
using namespace cirptc::circulant;
using testing_support::Gen;
using testing_support::rel_err;

namespace {

BlockCirculantMatrix random_bcm(Gen& g, std::size_t p, std::size_t q, std::size_t l) {
  return BlockCirculantMatrix(p, q, l, g.vec(p * q * l));
}

// Dense product written out independently of bcm_expand: entry (r, c) taken
// straight from the rotation rule.
RealVector oracle_matvec(const BlockCirculantMatrix& w, const RealVector& x) {
  const std::size_t l = w.order();
  RealVector y(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) {
      auto b = w.block(r / l, c / l);
      const std::size_t i = r % l, j = c % l;
      y[r] += b[(j + l - i) % l] * x[c];
    }
  return y;
}

}  // namespace

TEST_CASE("circ_expand rotates rows to the right") {
  const DenseMatrix m = circ_expand(PrimaryVector({1, 2, 3, 4}));
  const DenseMatrix expected(4, 4, {1, 2, 3, 4, 4, 1, 2, 3, 3, 4, 1, 2, 2, 3, 4, 1});
  CHECK(m == expected);
  CHECK(circ_expand(PrimaryVector({5})) == DenseMatrix(1, 1, {5}));

  Gen g(1);
  for (std::size_t l = 1; l <= 9; ++l) {
    const auto w = g.vec(l);
    const DenseMatrix e = circ_expand(PrimaryVector(w));
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) CHECK(e(i, j) == w[(j + l - i) % l]);
  }
}

TEST_CASE("PrimaryVector rejects empty and non-finite input") {
  CHECK_THROWS_AS(PrimaryVector({}), DimensionError);
  CHECK_THROWS_AS(PrimaryVector({1.0, NAN}), DomainError);
}

TEST_CASE("bcm_expand places circulant blocks") {
  Gen g(2);
  const auto single = random_bcm(g, 1, 1, 4);
  CHECK(bcm_expand(single) == circ_expand(single.primary(0, 0)));

  const auto tall = random_bcm(g, 3, 1, 4);
  const DenseMatrix t = bcm_expand(tall);
  CHECK(t.rows() == 12);
  CHECK(t.cols() == 4);

  const auto w = random_bcm(g, 2, 2, 4);
  const DenseMatrix d = bcm_expand(w);
  for (std::size_t bi = 0; bi < 2; ++bi)
    for (std::size_t bj = 0; bj < 2; ++bj)
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
          CHECK(d(bi * 4 + i, bj * 4 + j) == d(bi * 4 + (i + 1) % 4, bj * 4 + (j + 1) % 4));
}

TEST_CASE("identity and zero BCMs") {
  Gen g(3);
  for (std::size_t l : {1u, 4u, 8u}) {
    BlockCirculantMatrix id(3, 3, l);
    for (std::size_t i = 0; i < 3; ++i) id.block(i, i)[0] = 1.0;
    const auto x = g.vec(3 * l);
    CHECK(bcm_matvec_direct(id, x) == x);
    CHECK(max_abs_diff(bcm_matvec_fft(id, x), x) < 1e-14);
    const BlockCirculantMatrix zero(2, 3, l);
    CHECK(max_abs(bcm_matvec_direct(zero, x)) == 0.0);
    CHECK(max_abs(bcm_matvec_fft(zero, x)) == 0.0);
  }
}

TEST_CASE("single shift block permutes the input") {
  const BlockCirculantMatrix w(1, 1, 4, {0, 1, 0, 0});
  const RealVector x{1, 2, 3, 4};
  const RealVector expected{2, 3, 4, 1};
  CHECK(bcm_matvec_direct(w, x) == expected);
  CHECK(max_abs_diff(bcm_matvec_fft(w, x), expected) < 1e-14);
  CHECK(bcm_matvec(w, x) == expected);
}

TEST_CASE("fft and per-block paths agree with the dense oracle") {
  Gen g(4);
  const auto w = random_bcm(g, 2, 2, 4);
  const auto x = g.vec(8);
  CHECK(rel_err(bcm_matvec_direct(w, x), oracle_matvec(w, x)) < 1e-14);

  int cases = 0;
  for (std::size_t l : {1u, 2u, 3u, 4u, 5u, 8u, 12u, 16u}) {
    for (int rep = 0; rep < 25; ++rep) {
      const std::size_t p = g.index(1, 64 / l), q = g.index(1, 64 / l);
      const auto w2 = random_bcm(g, p, q, l);
      const auto x2 = g.vec(q * l);
      const auto ref = oracle_matvec(w2, x2);
      CHECK(rel_err(bcm_matvec_direct(w2, x2), ref) < 1e-12);
      CHECK(rel_err(bcm_matvec_fft(w2, x2), ref) < 1e-9);
      CHECK(rel_err(bcm_matvec(w2, x2), ref) < 1e-12);
      ++cases;
    }
  }
  CHECK(cases == 200);
}

TEST_CASE("matvec rejects bad input") {
  const BlockCirculantMatrix w(2, 2, 4);
  CHECK_THROWS_AS(bcm_matvec_direct(w, RealVector(7)), DimensionError);
  CHECK_THROWS_AS(bcm_matvec_fft(w, RealVector(9)), DimensionError);
  RealVector bad(8, 0.0);
  bad[3] = INFINITY;
  CHECK_THROWS_AS(bcm_matvec_fft(w, bad), DomainError);
}

TEST_CASE("fft path multiply count scales as PQ l log l") {
  Gen g(5);
  // Same 256x256 matrix size, growing block order: direct cost is constant
  // M*N, FFT cost per block is O(l log l) over (256/l)^2 blocks.
  std::uint64_t prev = 0;
  for (std::size_t l : {16u, 32u, 64u, 128u}) {
    const std::size_t p = 256 / l;
    const auto w = random_bcm(g, p, p, l);
    const auto x = g.vec(256);
    OpCounter fast, dense;
    bcm_matvec_fft(w, x, &fast);
    bcm_matvec_direct(w, x, &dense);
    CHECK(dense.real_multiplies == 256u * 256u);
    CHECK(fast.real_multiplies < dense.real_multiplies);
    const double model = double(p * p * l) * std::log2(double(l));
    const double c = double(fast.real_multiplies) / model;
    CHECK(c > 0.5);
    CHECK(c < 8.0);
    if (prev != 0) CHECK(fast.real_multiplies < prev);
    prev = fast.real_multiplies;
  }
}

TEST_CASE("partition and padding") {
  const RealVector x{1, 2, 3, 4, 5, 6, 7, 8};
  const auto parts = partition_vector(x, 4);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0] == RealVector{1, 2, 3, 4});
  CHECK(parts[1] == RealVector{5, 6, 7, 8});
  CHECK(partition_vector(x, 8).size() == 1);
  CHECK_THROWS_AS(partition_vector(x, 3), DimensionError);

  Gen g(6);
  for (std::size_t l : {1u, 2u, 5u}) {
    const auto v = g.vec(l * 7);
    RealVector cat;
    for (const auto& s : partition_vector(v, l)) cat.insert(cat.end(), s.begin(), s.end());
    CHECK(cat == v);
  }
  CHECK(pad_to_multiple(RealVector{1, 2, 3}, 4) == RealVector{1, 2, 3, 0});
  CHECK(pad_to_multiple(RealVector{1, 2, 3, 4}, 4).size() == 4);
}

TEST_CASE("first_column reverses indices") {
  CHECK(first_column(RealVector{1, 2, 3, 4}) == RealVector{1, 4, 3, 2});
  const DenseMatrix e = circ_expand(PrimaryVector({1, 2, 3, 4}));
  const auto c = first_column(RealVector{1, 2, 3, 4});
  for (std::size_t k = 0; k < 4; ++k) CHECK(e(k, 0) == c[k]);
}

TEST_CASE("transpose") {
  Gen g(7);
  const auto w = random_bcm(g, 2, 3, 4);
  CHECK(bcm_expand(bcm_transpose(w)) == bcm_expand(w).transposed());
}

TEST_CASE("bcm_project is the nearest circulant, idempotent and linear") {
  Gen g(8);
  const auto w = random_bcm(g, 2, 3, 4);
  CHECK(bcm_project(bcm_expand(w), 4) == w);

  const DenseMatrix a(4, 6, g.vec(24));
  const auto one = bcm_project(a, 1);
  CHECK(bcm_expand(one) == a);

  const DenseMatrix r(4, 4, g.vec(16));
  const auto proj = bcm_project(r, 4);
  CHECK(bcm_project(bcm_expand(proj), 4) == proj);
  auto frob = [&](std::span<const double> prim) {
    double s = 0.0;
    const DenseMatrix c = circ_expand(PrimaryVector(RealVector(prim.begin(), prim.end())));
    for (std::size_t i = 0; i < 16; ++i) s += std::pow(r.data()[i] - c.data()[i], 2);
    return s;
  };
  const double best = frob(proj.parameters());
  for (int trial = 0; trial < 400; ++trial) {
    RealVector p(proj.parameters().begin(), proj.parameters().end());
    const double h = trial < 200 ? 1e-3 : 0.3;
    for (auto& v : p) v += g.uniform(-h, h);
    CHECK(frob(p) >= best);
  }

  const DenseMatrix b(8, 8, g.vec(64)), c(8, 8, g.vec(64));
  DenseMatrix combo(8, 8);
  for (std::size_t i = 0; i < 64; ++i) combo.data()[i] = 2.5 * b.data()[i] - 0.75 * c.data()[i];
  const auto pb = bcm_project(b, 4), pc = bcm_project(c, 4), pcombo = bcm_project(combo, 4);
  for (std::size_t i = 0; i < pcombo.stored_scalars(); ++i)
    CHECK(pcombo.parameters()[i] ==
          doctest::Approx(2.5 * pb.parameters()[i] - 0.75 * pc.parameters()[i]).epsilon(1e-13));

  CHECK_THROWS_AS(bcm_project(DenseMatrix(6, 8), 4), DimensionError);
}

TEST_CASE("count_params") {
  const BlockCirculantMatrix w(2, 2, 4);
  const auto c = count_params(w);
  CHECK(c.independent == 16);
  CHECK(c.dense_equivalent == 64);
  CHECK(c.ratio == 0.25);
  CHECK(c.independent == w.stored_scalars());
  CHECK(count_params(BlockCirculantMatrix(3, 5, 1)).ratio == 1.0);
}

TEST_CASE("kernel extension onto one crossbar column") {
  Gen g(9);
  const auto kernel = g.vec(9);
  const auto ext = circulant_extend_kernel(kernel, 4);
  CHECK(ext.bcm.rows() == 12);
  CHECK(ext.bcm.cols() == 4);
  CHECK(ext.padding_rows == 3);
  for (std::size_t r = 0; r < 12; ++r)
    CHECK(ext.bcm.at(r, ext.target_column) == (r < 9 ? kernel[r] : 0.0));

  const auto exact = circulant_extend_kernel(g.vec(8), 4);
  CHECK(exact.padding_rows == 0);
  CHECK_THROWS_AS(circulant_extend_kernel(kernel, 0), DimensionError);

  for (int rep = 0; rep < 50; ++rep) {
    const auto k = g.dyadic(9), x = g.dyadic(9);
    double dot = 0.0;
    for (std::size_t i = 0; i < 9; ++i) dot += k[i] * x[i];
    for (std::size_t t = 0; t < 4; ++t) CHECK(extended_dot(circulant_extend_kernel(k, 4, t), x) == dot);
  }
}
