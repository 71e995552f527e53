#pragma once

// Device models for the photonic crossbar: raised-cosine MZM input encoders,
// add-drop MRR weight encoders and switches, photodetectors with a
// wavelength-dependent responsivity, WDM channel planning, spectral crosstalk
// and the Q-factor resolution bound.
//
// Units: wavelengths in nm, losses and extinction in dB, power in W, current
// in A, responsivity in A/W.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cirptc/linalg.hpp"

namespace cirptc::photonics {

double db_to_linear(double db);

struct MzmParams {
  double extinction_ratio_db = 20.0;
  double insertion_loss_db = 1.0;
  // phi(drive) = phase_offset_rad + phase_per_unit_drive_rad * drive
  double phase_offset_rad = 3.141592653589793;
  double phase_per_unit_drive_rad = -3.141592653589793;

  double floor() const;        // 10^(-ER/10)
  double peak() const;         // 10^(-IL/10)
};

// T = floor + (peak - floor) cos^2(phi / 2). Wavelength-flat.
double mzm_transmission(double drive, const MzmParams& p);
// Drive in [0, 1] giving transmission t on the monotone sweep from drive 0 to 1.
double mzm_drive_for(double t, const MzmParams& p);

enum class Branch { left, right };

struct MrrParams {
  double resonant_wavelength_nm = 1550.0;
  double quality_factor = 8000.0;
  double fsr_nm = 20.0;
  double coupling_asymmetry = 0.1;
  double insertion_loss_db = 0.5;
  // Which side of the resonance the operating channel sits on while the ring
  // is detuned: left means the resonance is moved above the channel.
  Branch branch = Branch::left;

  double fwhm_nm() const { return resonant_wavelength_nm / quality_factor; }
  double peak() const;
};

// Periodic Lorentzian (Airy) drop response, exactly half of peak at
// +-FWHM/2 and periodic in FSR.
double mrr_drop_transmission(double wavelength_nm, const MrrParams& p);

// Drop transmission at `channel_nm` when the ring resonance is moved by
// `detuning_nm` away from the channel on the configured branch.
double mrr_detuned_transmission(double detuning_nm, const MrrParams& p);

// Detuning in [0, max_detuning_nm] that gives transmission `target`;
// bisection to `tol` of full scale. DeviceRangeError if out of reach.
double mrr_detuning_for(double target, double max_detuning_nm, const MrrParams& p,
                        double tol = 1e-10);

struct PdParams {
  // (wavelength nm, A/W), sorted by wavelength. Piecewise linear, clamped
  // outside the table.
  std::vector<std::pair<double, double>> responsivity{{1500.0, 1.0}, {1600.0, 1.0}};
  double dark_current_a = 5e-8;

  double responsivity_at(double wavelength_nm) const;
  void validate() const;
};

// I = dark + sum_c R(lambda_c) P_c.
double pd_response(std::span<const double> powers_w, std::span<const double> wavelengths_nm,
                   const PdParams& p);

class WavelengthPlan {
 public:
  WavelengthPlan() = default;
  // Channel (fold f, slot s) = base_channels[s] + f * fsr.
  WavelengthPlan(std::vector<double> base_channels, double fsr_nm, std::size_t folds);

  std::size_t slots() const noexcept { return base_.size(); }
  std::size_t folds() const noexcept { return folds_; }
  std::size_t size() const noexcept { return base_.size() * folds_; }
  double fsr_nm() const noexcept { return fsr_; }

  // Logical index = fold * slots + slot.
  double channel(std::size_t logical) const;
  double channel(std::size_t fold, std::size_t slot) const { return channel(fold * slots() + slot); }
  std::pair<std::size_t, std::size_t> fold_slot(std::size_t logical) const;
  std::size_t logical_index(std::size_t fold, std::size_t slot) const;
  std::span<const double> base_channels() const noexcept { return base_; }
  std::vector<double> channels() const;

 private:
  std::vector<double> base_;
  double fsr_ = 0.0;
  std::size_t folds_ = 1;
};

// N channels spaced fsr/N starting at base, replicated across r FSRs.
WavelengthPlan plan_wavelengths(std::size_t n, double fsr_nm, double base_nm, std::size_t folds);
// The four-channel prototype plan.
WavelengthPlan prototype_plan(double fsr_nm = 20.0);
inline constexpr double kPrototypeChannels[4] = {1545.5, 1551.0, 1560.5, 1563.0};

// X(i, j) = T_i(lambda_j) / T_i(lambda_i) where switch i is `switch_template`
// tuned to channel i of the plan (with the plan's FSR).
DenseMatrix spectral_crosstalk_matrix(const WavelengthPlan& plan, const MrrParams& switch_template);
DenseMatrix spectral_crosstalk_matrix(const WavelengthPlan& plan, std::span<const MrrParams> switches);

struct QBoundGeometry {
  double wavelength_nm = 1550.0;
  // 48 slots of a 12.5 GHz flex grid (~0.1 nm each at 1550 nm).
  double fsr_nm = 4.8;
  // Aggregate leakage allowed, as a fraction of one LSB.
  double lsb_fraction = 0.5;
};

// Worst-case summed leakage from the other N-1 uniformly spaced channels,
// relative to the on-resonance drop.
double aggregate_leakage(std::size_t n, double q, const QBoundGeometry& g);

// Smallest Q meeting aggregate_leakage <= lsb_fraction / (2^bits - 1).
double min_q_for_resolution(std::size_t n, int bits, const QBoundGeometry& g = {});

}  // namespace cirptc::photonics
