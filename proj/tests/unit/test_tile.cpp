#include <doctest.h>

#include <cmath>
#include <vector>

#include "cirptc/conv_lowering.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/full_range.hpp"
#include "cirptc/tile_sim.hpp"
#include "support/random.hpp"

using namespace cirptc;
using namespace cirptc::sim;
using testing_support::Gen;

namespace {

std::vector<double> grid_values(Gen& g, std::size_t n, const quant::QuantSpec& q) {
  std::vector<double> v(n);
  for (auto& x : v) x = quant::from_code(std::uint32_t(g.index(0, q.levels() - 1)), q);
  return v;
}

TileConfig folded_config(std::size_t r, bool sloped) {
  TileConfig cfg;
  cfg.plan = photonics::plan_wavelengths(4, 20.0, 1530.0, r);
  cfg.switch_mrr.fsr_nm = 20.0;
  cfg.pd.responsivity = sloped ? std::vector<std::pair<double, double>>{{1530.0, 1.0}, {1610.0, 0.8}}
                               : std::vector<std::pair<double, double>>{{1500.0, 1.0}, {1650.0, 1.0}};
  return cfg;
}

}  // namespace

TEST_CASE("ideal tile semantics") {
  const TileConfig cfg = prototype_tile();
  const std::vector<double> x{0.2, 0.6, 1.0, 0.0};
  const auto xq = quant::quantize(x, cfg.input_quant);
  CHECK(forward_ideal(std::vector<double>{1, 0, 0, 0}, x, cfg) == xq);
  const auto full = forward_ideal(std::vector<double>(4, 1.0), std::vector<double>(4, 1.0), cfg);
  for (double v : full) CHECK(v == 4.0);
  CHECK_THROWS_AS(forward_ideal(std::vector<double>{1.2, 0, 0, 0}, x, cfg), DomainError);
}

TEST_CASE("degenerate physics reproduces the quantized ideal product") {
  Gen g(21);
  const TileConfig cfg = prototype_tile();
  const double lsb = output_lsb(cfg);
  for (int rep = 0; rep < 200; ++rep) {
    const auto w = g.vec(4, 0.0, 1.0), x = g.vec(4, 0.0, 1.0);
    const auto ideal = forward_ideal(w, x, cfg);
    const auto phys = forward_physical(w, x, cfg, 1);
    CHECK(max_abs_diff(ideal, phys) <= 0.5 * lsb);
  }
}

TEST_CASE("zero input yields the dark-current floor") {
  TileConfig cfg = prototype_tile();
  cfg.dark_subtract = false;
  TileTrace trace;
  forward_physical(std::vector<double>{0.3, 0.9, 0.1, 0.5}, std::vector<double>(4, 0.0), cfg, 1, &trace);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(trace.currents_a[c] == doctest::Approx(trace.floor_a[c]).epsilon(1e-14));
    CHECK(trace.floor_a[c] > cfg.pd.dark_current_a);
  }
  // All-zero weights and inputs: only dark current plus ring and MZM leakage.
  const auto y = forward_physical(std::vector<double>(4, 0.0), std::vector<double>(4, 0.0), cfg, 1, &trace);
  const TileCalibration cal = calibrate_tile(cfg);
  for (double v : y) CHECK(v == doctest::Approx(cfg.pd.dark_current_a / cal.gain).epsilon(1e-9));
}

TEST_CASE("noise is seeded and scaled") {
  TileConfig cfg = prototype_tile();
  cfg.noise = {0.01, 5, true};
  const std::vector<double> w{0.5, 0.25, 1.0, 0.0}, x{0.4, 0.8, 0.2, 1.0};
  CHECK(forward_physical(w, x, cfg, 9) == forward_physical(w, x, cfg, 9));
  CHECK(forward_physical(w, x, cfg, 9) != forward_physical(w, x, cfg, 10));
  Gen g(3);
  double sq = 0.0;
  const int n = 4000;
  const auto tile = program_tile(cfg, w);
  const auto ideal = forward_ideal(w, x, cfg);
  for (int i = 0; i < n; ++i) {
    const auto y = run_tile(cfg, tile, x, std::uint64_t(i));
    sq += (y[0] - ideal[0]) * (y[0] - ideal[0]);
  }
  // sigma_rel of the full-scale output l * 1 * 1.
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.04).epsilon(0.05));
}

TEST_CASE("outputs are monotone in each programmed weight") {
  Gen g(4);
  TileConfig cfg = prototype_tile();
  cfg.crosstalk_on = true;
  cfg.switch_mrr.quality_factor = 2000.0;
  for (int rep = 0; rep < 20; ++rep) {
    auto w = grid_values(g, 4, cfg.weight_quant);
    const auto x = g.vec(4, 0.0, 1.0);
    const std::size_t k = g.index(0, 3);
    const auto before = forward_physical(w, x, cfg, 0);
    w[k] = std::min(1.0, w[k] + 3.0 / 63.0);
    const auto after = forward_physical(w, x, cfg, 0);
    for (std::size_t c = 0; c < 4; ++c) CHECK(after[c] >= before[c] - 1e-12);
  }
}

TEST_CASE("unprogrammable weights name the element") {
  TileConfig cfg = folded_config(2, true);
  cfg.pd.responsivity = {{1530.0, 1.0}, {1570.0, 0.3}};
  try {
    forward_folded(circulant::BlockCirculantMatrix(1, 2, 4, std::vector<double>(8, 1.0)), std::vector<double>(8, 1.0),
                   cfg, 0);
    FAIL("expected DeviceRangeError");
  } catch (const DeviceRangeError& e) {
    CHECK(std::string(e.what()).find("fold 0 slot 3") != std::string::npos);
  }
}

TEST_CASE("spectral folding") {
  Gen g(5);
  const TileConfig one = folded_config(1, false);
  const auto w1 = g.vec(4, 0.0, 1.0), x1 = g.vec(4, 0.0, 1.0);
  CHECK(forward_folded(circulant::BlockCirculantMatrix(1, 1, 4, w1), x1, one, 0) == forward_physical(w1, x1, one, 0));

  for (bool sloped : {false, true}) {
    const TileConfig cfg = folded_config(4, sloped);
    const double lsb = output_lsb(cfg);
    for (int rep = 0; rep < 20; ++rep) {
      const circulant::BlockCirculantMatrix w(1, 4, 4, grid_values(g, 16, cfg.weight_quant));
      const auto x = grid_values(g, 16, cfg.input_quant);
      const auto ref = circulant::bcm_matvec_direct(w, x);
      CHECK(max_abs_diff(forward_folded(w, x, cfg, 0), ref) < lsb);
    }
  }

  // Without compensation a sloped responsivity leaves a per-fold gain error.
  TileConfig off = folded_config(4, true);
  off.responsivity_compensation = false;
  double worst = 0.0;
  for (std::size_t f = 0; f < 4; ++f) {
    std::vector<double> wp(16, 0.0), x(16, 0.0);
    for (std::size_t s = 0; s < 4; ++s) {
      wp[f * 4 + s] = 1.0;
      x[f * 4 + s] = 1.0;
    }
    const circulant::BlockCirculantMatrix w(1, 4, 4, wp);
    const auto y = forward_folded(w, x, off, 0);
    const auto ref = circulant::bcm_matvec_direct(w, x);
    worst = std::max(worst, max_abs_diff(y, ref));
  }
  CHECK(worst > 10.0 * output_lsb(off));
}

TEST_CASE("full-range execution") {
  Gen g(6);
  TileConfig cfg = prototype_tile();
  const double lsb = output_lsb(cfg);
  for (int rep = 0; rep < 50; ++rep) {
    const circulant::BlockCirculantMatrix w(1, 1, 4, g.vec(4, -1.0, 1.0));
    const auto x = g.vec(4, 0.0, 1.0);
    const auto ref = fullrange_reference(w, x, cfg);
    const auto a = forward_fullrange(w, x, cfg, FullRangeMethod::sign_split, 3);
    const auto b = forward_fullrange(w, x, cfg, FullRangeMethod::bias_reference, 3);
    const double m = max_abs(quantize_signed(w, 6).parameters());
    CHECK(max_abs_diff(a, ref) <= m * lsb);
    CHECK(max_abs_diff(b, ref) <= m * lsb);
    CHECK(max_abs_diff(a, b) <= m * lsb);
  }
  // All-positive weights: sign split equals the single pass. The values are on
  // both the unsigned and the symmetric signed 6-bit grids.
  const std::vector<double> pos{15.0 / 63, 1.0, 31.0 / 63, 47.0 / 63};
  const auto x = g.vec(4, 0.0, 1.0);
  const auto single = forward_physical(pos, x, cfg, 0);
  const auto split = forward_fullrange(circulant::BlockCirculantMatrix(1, 1, 4, pos), x, cfg,
                                       FullRangeMethod::sign_split, 0);
  CHECK(max_abs_diff(single, split) < 1e-9);

  // Dark current left in both passes cancels in the difference.
  cfg.dark_subtract = false;
  const circulant::BlockCirculantMatrix w(1, 1, 4, {-0.5, 0.25, 1.0, -1.0});
  const auto ref = fullrange_reference(w, x, cfg);
  for (auto method : {FullRangeMethod::sign_split, FullRangeMethod::bias_reference})
    CHECK(max_abs_diff(forward_fullrange(w, x, cfg, method, 0), ref) < lsb);
  CHECK_THROWS_AS(forward_fullrange(w, std::vector<double>{0.1, -0.2, 0.3, 0.4}, cfg, FullRangeMethod::sign_split, 0),
                  DomainError);

  const std::vector<double> p1{1.0, 2.0}, p2{0.5, 0.25};
  const auto base = combine_passes(2.0, p1, p2);
  CHECK(combine_passes(2.0, std::vector<double>{1.0 + 7.5, 2.0 + 7.5}, std::vector<double>{0.5 + 7.5, 0.25 + 7.5}) == base);
}

TEST_CASE("tiled BCM matches the signed quantized product") {
  Gen g(7);
  const TileConfig cfg = prototype_tile();
  const circulant::BlockCirculantMatrix w(3, 2, 4, g.vec(24, -0.8, 0.8));
  const auto x = g.vec(8, 0.0, 2.0);
  const TiledBcm tiled(w, cfg);
  CHECK(tiled.tile_passes() == 12);
  RealVector xq(8);
  for (std::size_t i = 0; i < 8; ++i) xq[i] = quant::quantize(x[i] / 2.0, cfg.input_quant) * 2.0;
  const auto ref = circulant::bcm_matvec_direct(tiled.quantized(), xq);
  CHECK(max_abs_diff(tiled.apply(x, 0, 2.0), ref) < 1e-8);
}

TEST_CASE("streamed MVM") {
  Gen g(8);
  TileConfig cfg = prototype_tile();
  cfg.noise = {0.02, 77, true};
  const std::vector<double> w{0.5, 0.0, 1.0, 0.25};
  DenseMatrix xs(4, 5, g.vec(20, 0.0, 1.0));
  const auto s = run_mvm_stream(w, xs, cfg, 80e-6);
  CHECK(s.rate_baud == doctest::Approx(12500.0));
  CHECK(s.records.size() == 20);
  const auto tile = program_tile(cfg, w);
  for (std::size_t p = 0; p < 5; ++p) {
    RealVector x(4);
    for (std::size_t i = 0; i < 4; ++i) x[i] = xs(i, p);
    const auto y = run_tile(cfg, tile, x, cfg.noise.seed ^ p);
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(s.records[p * 4 + c].simulated == y[c]);
      CHECK(s.records[p * 4 + c].time_s == doctest::Approx(p * 80e-6));
    }
  }
  DenseMatrix single(4, 1, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK(run_mvm_stream(w, single, cfg, 80e-6).records.back().slot == 0);
}
