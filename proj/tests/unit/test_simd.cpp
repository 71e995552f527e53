#include <doctest.h>

#include <vector>

#include "cirptc/simd.hpp"
#include "support/random.hpp"

using cirptc::simd::KernelTable;

namespace {

void compare_tables(const KernelTable& ref, const KernelTable& fast) {
  testing_support::Gen g(7);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 33u, 100u}) {
    auto a = g.vec(n), b = g.vec(n);
    CHECK(fast.dot(a.data(), b.data(), n) == doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-12));
    auto y1 = g.vec(n), y2 = y1;
    ref.axpy(0.37, a.data(), y1.data(), n);
    fast.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-14));
  }
  for (std::size_t m : {1u, 3u, 5u, 8u}) {
    for (std::size_t k : {1u, 4u, 9u, 17u}) {
      for (std::size_t n : {1u, 2u, 7u, 12u}) {
        auto a = g.vec(m * k), b = g.vec(k * n), bt = g.vec(n * k);
        std::vector<double> c1(m * n), c2(m * n, 99.0);
        ref.gemm(a.data(), b.data(), c1.data(), m, k, n);
        fast.gemm(a.data(), b.data(), c2.data(), m, k, n);
        for (std::size_t i = 0; i < m * n; ++i) CHECK(c2[i] == doctest::Approx(c1[i]).epsilon(1e-12));
        ref.gemm_nt(a.data(), bt.data(), c1.data(), m, k, n);
        fast.gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
        for (std::size_t i = 0; i < m * n; ++i) CHECK(c2[i] == doctest::Approx(c1[i]).epsilon(1e-12));
      }
      auto a = g.vec(m * k), x = g.vec(k);
      std::vector<double> y1(m), y2(m);
      ref.gemv(a.data(), m, k, x.data(), y1.data());
      fast.gemv(a.data(), m, k, x.data(), y2.data());
      for (std::size_t i = 0; i < m; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-12));
    }
  }
  for (std::size_t n : {1u, 2u, 3u, 5u, 16u}) {
    auto a = g.vec(2 * n), b = g.vec(2 * n), acc1 = g.vec(2 * n), acc2 = acc1;
    ref.cmul_acc(a.data(), b.data(), acc1.data(), n);
    fast.cmul_acc(a.data(), b.data(), acc2.data(), n);
    for (std::size_t i = 0; i < 2 * n; ++i) CHECK(acc2[i] == doctest::Approx(acc1[i]).epsilon(1e-14));
  }
}

}  // namespace

TEST_CASE("scalar kernels compute textbook results") {
  const auto& s = cirptc::simd::scalar_kernels();
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(s.dot(a.data(), b.data(), 3) == 32.0);
  std::vector<double> c(4);
  std::vector<double> m{1, 2, 3, 4}, n{5, 6, 7, 8};
  s.gemm(m.data(), n.data(), c.data(), 2, 2, 2);
  CHECK(c == std::vector<double>{19, 22, 43, 50});
  s.gemm_nt(m.data(), n.data(), c.data(), 2, 2, 2);
  CHECK(c == std::vector<double>{17, 23, 39, 53});
  std::vector<double> za{1, 2}, zb{3, 4}, acc{0, 0};
  s.cmul_acc(za.data(), zb.data(), acc.data(), 1);
  CHECK(acc == std::vector<double>{-5, 10});
}

TEST_CASE("avx2 kernels match scalar reference") {
  const KernelTable* fast = cirptc::simd::avx2_kernels();
  if (fast == nullptr) {
    MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
    return;
  }
  compare_tables(cirptc::simd::scalar_kernels(), *fast);
}

TEST_CASE("set_level switches the active table") {
  using cirptc::simd::Level;
  const Level original = cirptc::simd::active().level;
  CHECK(cirptc::simd::set_level(Level::scalar) == Level::scalar);
  CHECK(cirptc::simd::active().level == Level::scalar);
  cirptc::simd::set_level(original);
  CHECK(cirptc::simd::active().level == original);
}
