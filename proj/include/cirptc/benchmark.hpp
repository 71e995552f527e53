#pragma once

// Analytical throughput, power, area and latency model of a CirPTC crossbar
// of M outputs and N inputs per fold, block order l and r spectral folds.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirptc/units.hpp"

namespace cirptc::bench {

using namespace units;

enum class WeightMrrModel { per_parameter, per_crosspoint, explicit_count };

struct AdcPoint {
  Hertz f;
  Watts power;
};

struct HardwareConfig {
  std::size_t M = 48, N = 48, l = 4, r = 1;
  Hertz f_op{10e9};

  Joules mzm_energy{0.35e-12};          // per symbol
  Watts mrr_hold_power{3e-3};           // per weight MRR
  std::vector<AdcPoint> adc_table{{Hertz(10e9), Watts(39e-3)}, {Hertz(25e9), Watts(194e-3)}};
  Joules tia_energy_per_bit{0.65e-12};
  int output_bits = 1;
  WeightMrrModel weight_mrr_model = WeightMrrModel::per_parameter;
  std::size_t weight_mrr_explicit = 0;
  bool mrr_thermal_enabled = true;
  Watts switch_static_power{0.0};       // per crossbar switch
  Watts weight_dac_power{0.0};          // per active weight when per_weight_drivers is set
  bool per_weight_drivers = false;      // uncompressed baseline: every weight MRR has its own DAC

  // Critical-path insertion loss = base + per_input * N + per_output * M.
  Decibels loss_base{3.0};
  Decibels loss_per_input{0.0};
  Decibels loss_per_output{0.0};
  Watts pd_sensitivity_floor{0.0};      // per channel

  SquareMm area_mzm{0.0}, area_mrr{0.0}, area_switch{0.0}, area_receiver{0.0};
  double routing_overhead = 0.2;

  Seconds delay_base{20e-12};
  Seconds delay_per_port{0.5e-12};

  void validate() const;
  std::size_t weight_mrr_count() const;
};

struct PowerBreakdown {
  Watts laser, input_mod, weight_mrr, adc, tia, stat, weight_dac, total;
  double fraction(Watts part) const { return part / total; }
};

OpsPerSecond ops_rate(const HardwareConfig& c);
Decibels insertion_loss_critical_path(const HardwareConfig& c);
Watts laser_power(const HardwareConfig& c);
// Linear interpolation inside the table; ConfigError outside it.
Watts adc_power(const HardwareConfig& c, Hertz f);
PowerBreakdown power_breakdown(const HardwareConfig& c);
SquareMm area_model(const HardwareConfig& c);

struct Efficiency {
  double tops_per_watt = 0.0;
  double tops_per_mm2 = 0.0;
};
Efficiency efficiency_and_density(const HardwareConfig& c);

// The same crossbar without compression or folding: M * N active weight
// MRRs, each with its own driver.
HardwareConfig uncompressed_baseline(const HardwareConfig& c);
// efficiency(c) / efficiency(uncompressed_baseline(c)); equal configs give 1.
double compare_uncompressed(const HardwareConfig& c, const std::optional<HardwareConfig>& baseline = std::nullopt);

struct LatencyBound {
  std::optional<Hertz> f_max;  // nullopt: unbounded (zero delays)
  bool feasible = true;
};
LatencyBound latency_bound(const HardwareConfig& c);

struct SweepRanges {
  std::vector<std::size_t> sizes{48};  // M = N
  std::vector<std::size_t> folds{1};
  std::vector<double> f_op_hz{10e9};
  std::vector<bool> mrr_thermal{true};
};

struct SweepRow {
  HardwareConfig cfg;
  OpsPerSecond ops;
  PowerBreakdown power;
  SquareMm area;
  Efficiency eff;
  LatencyBound latency;
};

std::vector<SweepRow> sweep(const HardwareConfig& base, const SweepRanges& ranges);
std::string sweep_csv(const std::vector<SweepRow>& rows);
inline constexpr const char* kSweepHeader =
    "M,N,l,r,f_op_hz,mrr_thermal,ops_tops,area_mm2,laser_w,input_mod_w,weight_mrr_w,adc_w,tia_w,static_w,"
    "total_w,laser_fraction,tops_per_w,tops_per_mm2,f_max_hz,feasible";

// Published anchors the free parameters are fitted to.
struct CalibrationTargets {
  double tops_per_w_48 = 9.53;
  double tops_per_w_48_r4_thermal_off = 47.94;
  double laser_fraction_64 = 0.4314;
  double ratio_48 = 3.82;
  double tops_per_mm2_48 = 4.85;
  double tops_per_mm2_48_r4 = 5.48;
};

// Solves the per-switch static power, per-channel detector floor, loss slope,
// baseline driver power and two footprints in closed form from the targets;
// everything else comes from `seed`.
HardwareConfig calibrate(const HardwareConfig& seed = {}, const CalibrationTargets& t = {});

// The frozen result of calibrate() with the defaults.
HardwareConfig default_hardware();

nlohmann::json hardware_to_json(const HardwareConfig& c);
HardwareConfig hardware_from_json(const nlohmann::json& j, const HardwareConfig& base = default_hardware());

}  // namespace cirptc::bench
