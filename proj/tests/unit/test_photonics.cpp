#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "cirptc/errors.hpp"
#include "cirptc/photonics.hpp"

using namespace cirptc;
using namespace cirptc::photonics;

TEST_CASE("MZM transfer curve") {
  MzmParams p;
  p.phase_offset_rad = 0.0;
  p.phase_per_unit_drive_rad = std::numbers::pi;
  CHECK(mzm_transmission(0.0, p) == doctest::Approx(db_to_linear(p.insertion_loss_db)).epsilon(1e-15));
  CHECK(mzm_transmission(1.0, p) == doctest::Approx(p.floor()).epsilon(1e-12));
  CHECK(p.floor() == doctest::Approx(0.01));

  const MzmParams d;  // default: rising from extinction to peak
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = mzm_transmission(i / 1000.0, d);
    CHECK(t > prev);
    CHECK(t >= d.floor() - 1e-15);
    CHECK(t <= 1.0);
    prev = t;
  }
  CHECK_THROWS_AS(mzm_transmission(1.5, d), DomainError);
  for (double t : {0.02, 0.3, 0.7}) CHECK(mzm_transmission(mzm_drive_for(t, d), d) == doctest::Approx(t).epsilon(1e-12));
  CHECK_THROWS_AS(mzm_drive_for(0.95, d), DeviceRangeError);
}

TEST_CASE("MRR drop response") {
  MrrParams p;
  p.resonant_wavelength_nm = 1551.0;
  const double peak = db_to_linear(p.insertion_loss_db) * (1.0 - p.coupling_asymmetry);
  CHECK(mrr_drop_transmission(1551.0, p) == doctest::Approx(peak).epsilon(1e-15));
  CHECK(std::abs(mrr_drop_transmission(1551.0 + p.fsr_nm, p) - peak) < 1e-9);
  CHECK(std::abs(mrr_drop_transmission(1551.0 + p.fwhm_nm() / 2, p) - peak / 2) < 1e-6);
  CHECK(std::abs(mrr_drop_transmission(1551.0 - p.fwhm_nm() / 2, p) - peak / 2) < 1e-6);
  for (int i = 0; i < 2000; ++i) {
    const double lam = 1530.0 + i * 0.0173;
    const double t = mrr_drop_transmission(lam, p);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    CHECK(std::abs(t - mrr_drop_transmission(lam + p.fsr_nm, p)) < 1e-9);
  }
}

TEST_CASE("MRR detuning inversion on both branches") {
  MrrParams p;
  for (Branch b : {Branch::left, Branch::right}) {
    p.branch = b;
    const double lo = mrr_detuned_transmission(1.0, p);
    for (double f : {0.0, 0.1, 0.5, 0.93, 1.0}) {
      const double target = lo + f * (p.peak() - lo);
      const double d = mrr_detuning_for(target, 1.0, p);
      CHECK(std::abs(mrr_detuned_transmission(d, p) - target) <= 1e-10 * p.peak());
    }
    CHECK_THROWS_AS(mrr_detuning_for(p.peak() * 1.01, 1.0, p), DeviceRangeError);
    CHECK_THROWS_AS(mrr_detuning_for(lo * 0.5, 1.0, p), DeviceRangeError);
  }
}

TEST_CASE("photodetector response") {
  PdParams pd;
  pd.dark_current_a = 2e-8;
  const std::vector<double> lam{1545.5, 1551.0};
  CHECK(pd_response(std::vector<double>{0.0, 0.0}, lam, pd) == 2e-8);
  CHECK(pd_response(std::vector<double>{1e-3}, std::vector<double>{1550.0}, pd) ==
        doctest::Approx(2e-8 + 1e-3).epsilon(1e-15));
  pd.responsivity = {{1500.0, 0.8}, {1550.0, 1.0}, {1600.0, 0.9}};
  CHECK(pd.responsivity_at(1525.0) == doctest::Approx(0.9));
  CHECK(pd.responsivity_at(1575.0) == doctest::Approx(0.95));
  CHECK(pd.responsivity_at(1400.0) == 0.8);
  const std::vector<double> p1{3e-4, 0.0}, p2{0.0, 5e-4}, both{3e-4, 5e-4};
  CHECK(pd_response(both, lam, pd) ==
        doctest::Approx(pd_response(p1, lam, pd) + pd_response(p2, lam, pd) - pd.dark_current_a).epsilon(1e-14));
  CHECK_THROWS_AS(pd_response(std::vector<double>{-1e-3, 0.0}, lam, pd), DomainError);
  CHECK(pd_response(both, lam, pd) >= pd.dark_current_a);
}

TEST_CASE("wavelength plans") {
  const auto proto = prototype_plan();
  CHECK(proto.channels() == std::vector<double>{1545.5, 1551.0, 1560.5, 1563.0});
  CHECK(plan_wavelengths(1, 20.0, 1550.0, 1).size() == 1);
  const auto big = plan_wavelengths(48, 4.8, 1550.0, 4);
  CHECK(big.size() == 192);
  std::set<double> distinct;
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t s = 0; s < 48; ++s) {
      const std::size_t idx = big.logical_index(f, s);
      CHECK(big.fold_slot(idx) == std::pair<std::size_t, std::size_t>{f, s});
      CHECK(big.channel(f, s) == doctest::Approx(big.channel(0, s) + f * 4.8));
      distinct.insert(big.channel(idx));
    }
  CHECK(distinct.size() == 192);
  CHECK_THROWS_AS(WavelengthPlan({1550.0, 1549.0}, 20.0, 1), ConfigError);
}

TEST_CASE("spectral crosstalk matrix") {
  MrrParams sw;
  const auto plan = prototype_plan();
  sw.quality_factor = 1e9;
  const DenseMatrix x9 = spectral_crosstalk_matrix(plan, sw);
  sw.quality_factor = 1e12;
  const DenseMatrix x12 = spectral_crosstalk_matrix(plan, sw);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(x9(i, j) - (i == j ? 1.0 : 0.0)) < 1e-6);
      CHECK(std::abs(x12(i, j) - (i == j ? 1.0 : 0.0)) < 1e-6);
    }

  sw.quality_factor = 8000.0;
  const DenseMatrix x = spectral_crosstalk_matrix(plan, sw);
  const auto lam = plan.channels();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 4; ++k) {
        if (j == i || k == i) continue;
        auto dist = [&](std::size_t a) {
          const double d = std::fmod(std::abs(lam[a] - lam[i]), plan.fsr_nm());
          return std::min(d, plan.fsr_nm() - d);
        };
        if (dist(j) < dist(k)) CHECK(x(i, j) > x(i, k));
      }

  // Uniform spacing: shifting labels cyclically leaves the matrix unchanged
  // up to the small change of linewidth (lambda / Q) across the band.
  const auto uni = plan_wavelengths(6, 12.0, 1550.0, 1);
  const DenseMatrix xu = spectral_crosstalk_matrix(uni, sw);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) CHECK(xu(i, j) == doctest::Approx(xu((i + 1) % 6, (j + 1) % 6)).epsilon(0.02));
}

TEST_CASE("Q bound for weight resolution") {
  const QBoundGeometry g;
  const double q48 = min_q_for_resolution(48, 6, g);
  CHECK(q48 > 2.49e5 / 3.0);
  CHECK(q48 < 2.49e5 * 3.0);
  const double limit = g.lsb_fraction / 63.0;
  CHECK(aggregate_leakage(48, q48, g) <= limit);
  CHECK(aggregate_leakage(48, q48 / 1.002, g) > limit);

  // Dense sweep oracle for N = 4, 4 bits.
  const double q4 = min_q_for_resolution(4, 4, g);
  double first_ok = 0.0;
  for (double q = 1.0; q < 1e7; q *= 1.0001)
    if (aggregate_leakage(4, q, g) <= g.lsb_fraction / 15.0) {
      first_ok = q;
      break;
    }
  CHECK(q4 == doctest::Approx(first_ok).epsilon(2e-3));

  CHECK(min_q_for_resolution(16, 7, g) > min_q_for_resolution(16, 6, g));
  CHECK(min_q_for_resolution(17, 6, g) > min_q_for_resolution(16, 6, g));
  CHECK_THROWS_AS(min_q_for_resolution(1, 6, g), ConfigError);
}
