#include "cirptc/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cirptc/errors.hpp"

namespace cirptc::photonics {

double db_to_linear(double db) { return std::pow(10.0, -db / 10.0); }

double MzmParams::floor() const { return db_to_linear(extinction_ratio_db); }
double MzmParams::peak() const { return db_to_linear(insertion_loss_db); }

namespace {

void check_mzm(const MzmParams& p) {
  if (!(p.extinction_ratio_db > 0.0)) throw ConfigError("MZM extinction ratio must be positive");
  if (p.insertion_loss_db < 0.0) throw ConfigError("MZM insertion loss must be nonnegative");
  if (p.floor() >= p.peak()) throw ConfigError("MZM extinction floor above peak transmission");
}

void check_mrr(const MrrParams& p) {
  if (!(p.quality_factor > 0.0)) throw ConfigError("MRR Q must be positive");
  if (!(p.fsr_nm > 0.0)) throw ConfigError("MRR FSR must be positive");
  if (p.coupling_asymmetry < 0.0 || p.coupling_asymmetry >= 1.0)
    throw ConfigError("MRR coupling asymmetry must lie in [0, 1)");
  if (p.insertion_loss_db < 0.0) throw ConfigError("MRR insertion loss must be nonnegative");
}

// Lorentzian relative drop at offset d from resonance.
double airy(double d, double fwhm, double fsr) {
  const double half = std::min(std::numbers::pi * fwhm / (2.0 * fsr), std::numbers::pi / 2.0);
  const double s0 = std::sin(half);
  const double finesse_coeff = 1.0 / (s0 * s0);
  const double s = std::sin(std::numbers::pi * d / fsr);
  return 1.0 / (1.0 + finesse_coeff * s * s);
}

}  // namespace

double mzm_transmission(double drive, const MzmParams& p) {
  check_mzm(p);
  if (!(drive >= 0.0 && drive <= 1.0))
    throw DomainError("mzm_transmission: drive " + std::to_string(drive) + " outside [0, 1]");
  const double phi = p.phase_offset_rad + p.phase_per_unit_drive_rad * drive;
  const double c = std::cos(phi / 2.0);
  return p.floor() + (p.peak() - p.floor()) * c * c;
}

double mzm_drive_for(double t, const MzmParams& p) {
  const double t0 = mzm_transmission(0.0, p), t1 = mzm_transmission(1.0, p);
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  if (t < lo - 1e-15 || t > hi + 1e-15)
    throw DeviceRangeError("MZM transmission " + std::to_string(t) + " outside [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
  double a = 0.0, b = 1.0;
  const bool rising = t1 >= t0;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    const bool below = mzm_transmission(m, p) < t;
    (below == rising ? a : b) = m;
  }
  return 0.5 * (a + b);
}

double MrrParams::peak() const { return db_to_linear(insertion_loss_db) * (1.0 - coupling_asymmetry); }

double mrr_drop_transmission(double wavelength_nm, const MrrParams& p) {
  check_mrr(p);
  return p.peak() * airy(wavelength_nm - p.resonant_wavelength_nm, p.fwhm_nm(), p.fsr_nm);
}

double mrr_detuned_transmission(double detuning_nm, const MrrParams& p) {
  check_mrr(p);
  if (detuning_nm < 0.0) throw DomainError("mrr_detuned_transmission: negative detuning");
  // On the left branch the resonance sits above the channel (channel - resonance < 0).
  const double d = p.branch == Branch::left ? -detuning_nm : detuning_nm;
  return p.peak() * airy(d, p.fwhm_nm(), p.fsr_nm);
}

double mrr_detuning_for(double target, double max_detuning_nm, const MrrParams& p, double tol) {
  if (max_detuning_nm <= 0.0 || max_detuning_nm > p.fsr_nm / 2.0)
    throw ConfigError("MRR detuning range must lie in (0, FSR/2]");
  const double hi_t = mrr_detuned_transmission(0.0, p);
  const double lo_t = mrr_detuned_transmission(max_detuning_nm, p);
  if (!(target >= lo_t && target <= hi_t))
    throw DeviceRangeError("MRR transmission " + std::to_string(target) + " outside reachable [" +
                           std::to_string(lo_t) + ", " + std::to_string(hi_t) + "]");
  double a = 0.0, b = max_detuning_nm;
  // Transmission falls monotonically with detuning on [0, FSR/2].
  while (true) {
    const double m = 0.5 * (a + b);
    const double t = mrr_detuned_transmission(m, p);
    if (std::abs(t - target) <= tol * hi_t || b - a < 1e-15) return m;
    (t > target ? a : b) = m;
  }
}

double PdParams::responsivity_at(double wavelength_nm) const {
  validate();
  if (wavelength_nm <= responsivity.front().first) return responsivity.front().second;
  if (wavelength_nm >= responsivity.back().first) return responsivity.back().second;
  const auto it = std::upper_bound(responsivity.begin(), responsivity.end(), wavelength_nm,
                                   [](double w, const auto& e) { return w < e.first; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (wavelength_nm - x0) / (x1 - x0);
}

void PdParams::validate() const {
  if (responsivity.empty()) throw ConfigError("PD responsivity table is empty");
  for (std::size_t i = 0; i < responsivity.size(); ++i) {
    if (!(responsivity[i].second >= 0.0)) throw ConfigError("PD responsivity must be nonnegative");
    if (i > 0 && !(responsivity[i].first > responsivity[i - 1].first))
      throw ConfigError("PD responsivity wavelengths must be strictly increasing");
  }
  if (!(dark_current_a >= 0.0)) throw ConfigError("PD dark current must be nonnegative");
}

double pd_response(std::span<const double> powers_w, std::span<const double> wavelengths_nm,
                   const PdParams& p) {
  if (powers_w.size() != wavelengths_nm.size())
    throw DimensionError("pd_response: power and wavelength counts differ");
  double i = p.dark_current_a;
  for (std::size_t c = 0; c < powers_w.size(); ++c) {
    if (!(powers_w[c] >= 0.0))
      throw DomainError("pd_response: negative or non-finite power on channel " + std::to_string(c));
    i += p.responsivity_at(wavelengths_nm[c]) * powers_w[c];
  }
  return i;
}

WavelengthPlan::WavelengthPlan(std::vector<double> base_channels, double fsr_nm, std::size_t folds)
    : base_(std::move(base_channels)), fsr_(fsr_nm), folds_(folds) {
  if (base_.empty()) throw ConfigError("WavelengthPlan: no channels");
  if (folds_ == 0) throw ConfigError("WavelengthPlan: folds must be >= 1");
  if (!(fsr_ > 0.0)) throw ConfigError("WavelengthPlan: FSR must be positive");
  for (std::size_t i = 1; i < base_.size(); ++i)
    if (!(base_[i] > base_[i - 1])) throw ConfigError("WavelengthPlan: channels must increase");
  if (base_.back() - base_.front() >= fsr_)
    throw ConfigError("WavelengthPlan: channels do not fit in one FSR");
}

double WavelengthPlan::channel(std::size_t logical) const {
  const auto [f, s] = fold_slot(logical);
  return base_[s] + static_cast<double>(f) * fsr_;
}

std::pair<std::size_t, std::size_t> WavelengthPlan::fold_slot(std::size_t logical) const {
  if (logical >= size()) throw DimensionError("WavelengthPlan: channel index out of range");
  return {logical / slots(), logical % slots()};
}

std::size_t WavelengthPlan::logical_index(std::size_t fold, std::size_t slot) const {
  if (fold >= folds_ || slot >= slots()) throw DimensionError("WavelengthPlan: fold/slot out of range");
  return fold * slots() + slot;
}

std::vector<double> WavelengthPlan::channels() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = channel(i);
  return out;
}

WavelengthPlan plan_wavelengths(std::size_t n, double fsr_nm, double base_nm, std::size_t folds) {
  if (n == 0) throw ConfigError("plan_wavelengths: need at least one channel");
  std::vector<double> base(n);
  for (std::size_t s = 0; s < n; ++s) base[s] = base_nm + static_cast<double>(s) * fsr_nm / double(n);
  return WavelengthPlan(std::move(base), fsr_nm, folds);
}

WavelengthPlan prototype_plan(double fsr_nm) {
  return WavelengthPlan(std::vector<double>(std::begin(kPrototypeChannels), std::end(kPrototypeChannels)),
                        fsr_nm, 1);
}

DenseMatrix spectral_crosstalk_matrix(const WavelengthPlan& plan, const MrrParams& switch_template) {
  std::vector<MrrParams> sw(plan.size(), switch_template);
  for (auto& p : sw) p.fsr_nm = plan.fsr_nm();
  for (std::size_t i = 0; i < sw.size(); ++i) sw[i].resonant_wavelength_nm = plan.channel(i);
  return spectral_crosstalk_matrix(plan, sw);
}

DenseMatrix spectral_crosstalk_matrix(const WavelengthPlan& plan, std::span<const MrrParams> switches) {
  if (switches.size() != plan.size())
    throw DimensionError("spectral_crosstalk_matrix: one switch per channel required");
  const std::size_t n = plan.size();
  DenseMatrix x(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double own = mrr_drop_transmission(plan.channel(i), switches[i]);
    for (std::size_t j = 0; j < n; ++j)
      x(i, j) = i == j ? 1.0 : mrr_drop_transmission(plan.channel(j), switches[i]) / own;
  }
  return x;
}

double aggregate_leakage(std::size_t n, double q, const QBoundGeometry& g) {
  const double fwhm = g.wavelength_nm / q;
  double sum = 0.0;
  for (std::size_t k = 1; k < n; ++k) sum += airy(double(k) * g.fsr_nm / double(n), fwhm, g.fsr_nm);
  return sum;
}

double min_q_for_resolution(std::size_t n, int bits, const QBoundGeometry& g) {
  if (n < 2) throw ConfigError("min_q_for_resolution: need N >= 2");
  if (bits < 1) throw ConfigError("min_q_for_resolution: need bits >= 1");
  if (!(g.fsr_nm > 0.0 && g.wavelength_nm > 0.0 && g.lsb_fraction > 0.0))
    throw ConfigError("min_q_for_resolution: invalid geometry");
  const double limit = g.lsb_fraction / (std::ldexp(1.0, bits) - 1.0);
  double lo = g.wavelength_nm / g.fsr_nm;  // FWHM equal to the FSR
  double hi = 1e13;
  if (aggregate_leakage(n, hi, g) > limit)
    throw ConfigError("min_q_for_resolution: no Q up to 1e13 meets the criterion");
  if (aggregate_leakage(n, lo, g) <= limit) return lo;
  while (hi / lo > 1.0 + 1e-3) {
    const double m = std::sqrt(lo * hi);
    (aggregate_leakage(n, m, g) <= limit ? hi : lo) = m;
  }
  return hi;
}

}  // namespace cirptc::photonics
