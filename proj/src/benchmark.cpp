#include "cirptc/benchmark.hpp"

#include <cmath>
#include <sstream>

#include "cirptc/device_profile.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"

namespace cirptc::bench {

void HardwareConfig::validate() const {
  if (M == 0 || N == 0 || l == 0 || r == 0) throw ConfigError("crossbar dimensions, order and folds must be positive");
  if (f_op.value < 0.0) throw ConfigError("f_op must be nonnegative");
  if (output_bits < 1) throw ConfigError("output_bits must be at least 1");
  if (adc_table.empty()) throw ConfigError("ADC power table is empty");
  for (std::size_t i = 1; i < adc_table.size(); ++i)
    if (!(adc_table[i].f > adc_table[i - 1].f)) throw ConfigError("ADC table frequencies must increase");
  const double costs[] = {mzm_energy.value,        mrr_hold_power.value,   tia_energy_per_bit.value,
                          switch_static_power.value, weight_dac_power.value, loss_base.value,
                          loss_per_input.value,    loss_per_output.value,  pd_sensitivity_floor.value,
                          area_mzm.value,          area_mrr.value,         area_switch.value,
                          area_receiver.value,     routing_overhead,       delay_base.value,
                          delay_per_port.value};
  for (double v : costs)
    if (!(v >= 0.0)) throw ConfigError("unit costs, losses, footprints and delays must be nonnegative");
  for (const auto& p : adc_table)
    if (!(p.power.value >= 0.0)) throw ConfigError("ADC power must be nonnegative");
}

std::size_t HardwareConfig::weight_mrr_count() const {
  switch (weight_mrr_model) {
    case WeightMrrModel::per_parameter:
      return M * r * N / l;
    case WeightMrrModel::per_crosspoint:
      return M * N;
    case WeightMrrModel::explicit_count:
      return weight_mrr_explicit;
  }
  return 0;
}

OpsPerSecond ops_rate(const HardwareConfig& c) {
  return OpsPerSecond(2.0 * double(c.M) * double(c.r * c.N) * c.f_op.value);
}

Decibels insertion_loss_critical_path(const HardwareConfig& c) {
  return c.loss_base + c.loss_per_input * double(c.N) + c.loss_per_output * double(c.M);
}

Watts laser_power(const HardwareConfig& c) {
  const double loss = insertion_loss_critical_path(c).value;
  return c.pd_sensitivity_floor * (std::pow(10.0, loss / 10.0) * double(c.r * c.N));
}

Watts adc_power(const HardwareConfig& c, Hertz f) {
  const auto& t = c.adc_table;
  if (f < t.front().f || f > t.back().f) {
    std::ostringstream os;
    os << "ADC power is tabulated for " << t.front().f.value << " to " << t.back().f.value << " Hz; " << f.value
       << " Hz would need extrapolation";
    throw ConfigError(os.str());
  }
  for (std::size_t i = 1; i < t.size(); ++i)
    if (f <= t[i].f) {
      const double a = (f - t[i - 1].f) / (t[i].f - t[i - 1].f);
      return t[i - 1].power * (1.0 - a) + t[i].power * a;
    }
  return t.back().power;
}

PowerBreakdown power_breakdown(const HardwareConfig& c) {
  c.validate();
  PowerBreakdown p;
  p.laser = laser_power(c);
  p.input_mod = c.mzm_energy * c.f_op * double(c.r * c.N);
  p.weight_mrr = c.mrr_thermal_enabled ? c.mrr_hold_power * double(c.weight_mrr_count()) : Watts(0.0);
  p.adc = adc_power(c, c.f_op) * double(c.M);
  p.tia = c.tia_energy_per_bit * c.f_op * double(c.M * std::size_t(c.output_bits));
  p.stat = c.switch_static_power * double(c.M * c.N);
  p.weight_dac = c.per_weight_drivers ? c.weight_dac_power * double(c.weight_mrr_count()) : Watts(0.0);
  p.total = p.laser + p.input_mod + p.weight_mrr + p.adc + p.tia + p.stat + p.weight_dac;
  return p;
}

SquareMm area_model(const HardwareConfig& c) {
  const SquareMm devices = c.area_mzm * double(c.r * c.N) + c.area_mrr * double(c.weight_mrr_count()) +
                           c.area_switch * double(c.M * c.N) + c.area_receiver * double(c.M);
  return devices * (1.0 + c.routing_overhead);
}

Efficiency efficiency_and_density(const HardwareConfig& c) {
  const OpsPerSecond ops = ops_rate(c);
  const Watts p = power_breakdown(c).total;
  const SquareMm a = area_model(c);
  return {p.value > 0.0 ? tops_per_watt(ops, p) : 0.0, a.value > 0.0 ? tops_per_mm2(ops, a) : 0.0};
}

HardwareConfig uncompressed_baseline(const HardwareConfig& c) {
  HardwareConfig b = c;
  b.l = 1;
  b.r = 1;
  b.weight_mrr_model = WeightMrrModel::per_parameter;
  b.mrr_thermal_enabled = true;
  b.per_weight_drivers = true;
  return b;
}

double compare_uncompressed(const HardwareConfig& c, const std::optional<HardwareConfig>& baseline) {
  const HardwareConfig b = baseline ? *baseline : uncompressed_baseline(c);
  return efficiency_and_density(c).tops_per_watt / efficiency_and_density(b).tops_per_watt;
}

LatencyBound latency_bound(const HardwareConfig& c) {
  const Seconds t = c.delay_base + c.delay_per_port * double(c.M + c.N);
  LatencyBound b;
  if (t.value <= 0.0) return b;
  b.f_max = 1.0 / t;
  b.feasible = c.f_op <= *b.f_max;
  return b;
}

std::vector<SweepRow> sweep(const HardwareConfig& base, const SweepRanges& ranges) {
  if (ranges.sizes.empty() || ranges.folds.empty() || ranges.f_op_hz.empty() || ranges.mrr_thermal.empty())
    throw ConfigError("sweep: every range needs at least one value");
  std::vector<SweepRow> rows;
  for (std::size_t n : ranges.sizes)
    for (std::size_t r : ranges.folds)
      for (double f : ranges.f_op_hz)
        for (bool thermal : ranges.mrr_thermal) {
          SweepRow row;
          row.cfg = base;
          row.cfg.M = row.cfg.N = n;
          row.cfg.r = r;
          row.cfg.f_op = Hertz(f);
          row.cfg.mrr_thermal_enabled = thermal;
          row.ops = ops_rate(row.cfg);
          row.power = power_breakdown(row.cfg);
          row.area = area_model(row.cfg);
          row.eff = efficiency_and_density(row.cfg);
          row.latency = latency_bound(row.cfg);
          rows.push_back(row);
        }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  using io::format_double;
  std::string s = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    const auto& c = r.cfg;
    const auto& p = r.power;
    s += std::to_string(c.M) + "," + std::to_string(c.N) + "," + std::to_string(c.l) + "," + std::to_string(c.r) + "," +
         format_double(c.f_op.value) + "," + (c.mrr_thermal_enabled ? "1" : "0") + "," +
         format_double(r.ops.value / 1e12) + "," + format_double(r.area.value) + "," + format_double(p.laser.value) +
         "," + format_double(p.input_mod.value) + "," + format_double(p.weight_mrr.value) + "," +
         format_double(p.adc.value) + "," + format_double(p.tia.value) + "," + format_double(p.stat.value) + "," +
         format_double(p.total.value) + "," + format_double(p.fraction(p.laser)) + "," +
         format_double(r.eff.tops_per_watt) + "," + format_double(r.eff.tops_per_mm2) + "," +
         (r.latency.f_max ? format_double(r.latency.f_max->value) : std::string("inf")) + "," +
         (r.latency.feasible ? "1" : "0") + "\n";
  }
  return s;
}

HardwareConfig calibrate(const HardwareConfig& seed, const CalibrationTargets& t) {
  HardwareConfig c = seed;
  c.M = c.N = 48;
  c.r = 1;
  c.mrr_thermal_enabled = true;
  c.validate();
  const double f = c.f_op.value;
  // Everything except the laser and the switch static power.
  auto fixed = [&](std::size_t n, std::size_t r, bool thermal) {
    HardwareConfig k = c;
    k.M = k.N = n;
    k.r = r;
    k.mrr_thermal_enabled = thermal;
    k.pd_sensitivity_floor = Watts(0.0);
    k.switch_static_power = Watts(0.0);
    k.weight_dac_power = Watts(0.0);
    return power_breakdown(k).total.value;
  };
  // Totals at 48 x 48: r = 1 and r = 4 with thermal hold off. Both contain
  // r * 48 * g of laser power (g per channel at this size) plus 2304 switches.
  const double total_r1 = 2.0 * 48 * 48 * f / (t.tops_per_w_48 * 1e12);
  const double total_r4 = 2.0 * 48 * 192 * f / (t.tops_per_w_48_r4_thermal_off * 1e12);
  const double a = total_r1 - fixed(48, 1, true), b = total_r4 - fixed(48, 4, false);
  const double g = (b - a) / (192.0 - 48.0);
  const double p_switch = (a - 48.0 * g) / 2304.0;
  if (!(g > 0.0 && p_switch > 0.0)) throw DomainError("calibrate: targets imply negative laser or static power");
  c.switch_static_power = Watts(p_switch);

  // Laser share at 64 x 64 fixes the per-channel laser power there, hence the
  // dB slope between 48 and 64.
  const double non_laser_64 = fixed(64, 1, true) + 64.0 * 64.0 * p_switch;
  const double laser_64 = t.laser_fraction_64 / (1.0 - t.laser_fraction_64) * non_laser_64;
  const double slope = 10.0 * std::log10(laser_64 / 64.0 / g) / 16.0;  // dB per unit of N with M = N
  c.loss_per_input = Decibels(slope / 2.0);
  c.loss_per_output = Decibels(slope / 2.0);
  c.pd_sensitivity_floor = Watts(g / std::pow(10.0, (c.loss_base.value + 48.0 * slope) / 10.0));

  // Baseline driver power from the compression ratio.
  HardwareConfig base = uncompressed_baseline(c);
  base.per_weight_drivers = false;
  const double baseline_total = 2.0 * 48 * 48 * f / (t.tops_per_w_48 / t.ratio_48 * 1e12);
  c.weight_dac_power = Watts((baseline_total - power_breakdown(base).total.value) / 2304.0);

  // Footprints: modulators and switches from the two density anchors.
  const double h = 1.0 + c.routing_overhead;
  const double area_r1 = 2.0 * 48 * 48 * f / (t.tops_per_mm2_48 * 1e12) / h;
  const double area_r4 = 2.0 * 48 * 192 * f / (t.tops_per_mm2_48_r4 * 1e12) / h;
  const double rest_r1 = c.area_mrr.value * 48 * 48 / double(c.l) + c.area_receiver.value * 48;
  const double rest_r4 = c.area_mrr.value * 48 * 192 / double(c.l) + c.area_receiver.value * 48;
  const double a_mzm = ((area_r4 - rest_r4) - (area_r1 - rest_r1)) / (192.0 - 48.0);
  const double a_sw = (area_r1 - rest_r1 - 48.0 * a_mzm) / 2304.0;
  if (!(a_mzm > 0.0 && a_sw > 0.0)) throw DomainError("calibrate: density targets imply negative footprints");
  c.area_mzm = SquareMm(a_mzm);
  c.area_switch = SquareMm(a_sw);
  return c;
}

HardwareConfig default_hardware() {
  HardwareConfig c;
  c.area_mrr = SquareMm(0.0025);
  c.area_receiver = SquareMm(0.01);
  c.switch_static_power = Watts(2.9401364642289994e-04);
  c.loss_per_input = Decibels(5.4182179437882938e-01);
  c.loss_per_output = Decibels(5.4182179437882938e-01);
  c.pd_sensitivity_floor = Watts(5.1112385864117339e-09);
  c.weight_dac_power = Watts(3.6681532004197289e-03);
  c.area_mzm = SquareMm(1.0966438407705620e-01);
  c.area_switch = SquareMm(3.1841811523315066e-04);
  return c;
}

namespace {

const char* model_name(WeightMrrModel m) {
  switch (m) {
    case WeightMrrModel::per_parameter: return "per_parameter";
    case WeightMrrModel::per_crosspoint: return "per_crosspoint";
    case WeightMrrModel::explicit_count: return "explicit";
  }
  return "";
}

WeightMrrModel parse_model(const std::string& s) {
  if (s == "per_parameter") return WeightMrrModel::per_parameter;
  if (s == "per_crosspoint") return WeightMrrModel::per_crosspoint;
  if (s == "explicit") return WeightMrrModel::explicit_count;
  throw ConfigError("weight_mrr_model must be per_parameter, per_crosspoint or explicit, got \"" + s + "\"");
}

}  // namespace

nlohmann::json hardware_to_json(const HardwareConfig& c) {
  nlohmann::json adc = nlohmann::json::array();
  for (const auto& p : c.adc_table) adc.push_back({p.f.value, p.power.value});
  return {{"format", "cirptc-hardware"},
          {"version", 1},
          {"M", c.M},
          {"N", c.N},
          {"l", c.l},
          {"r", c.r},
          {"f_op_hz", c.f_op.value},
          {"mzm_energy_j", c.mzm_energy.value},
          {"mrr_hold_power_w", c.mrr_hold_power.value},
          {"adc_table_hz_w", adc},
          {"tia_energy_j_per_bit", c.tia_energy_per_bit.value},
          {"output_bits", c.output_bits},
          {"weight_mrr_model", model_name(c.weight_mrr_model)},
          {"weight_mrr_explicit_count", c.weight_mrr_explicit},
          {"mrr_thermal_enabled", c.mrr_thermal_enabled},
          {"switch_static_power_w", c.switch_static_power.value},
          {"weight_dac_power_w", c.weight_dac_power.value},
          {"per_weight_drivers", c.per_weight_drivers},
          {"loss_base_db", c.loss_base.value},
          {"loss_per_input_db", c.loss_per_input.value},
          {"loss_per_output_db", c.loss_per_output.value},
          {"pd_sensitivity_floor_w", c.pd_sensitivity_floor.value},
          {"area_mzm_mm2", c.area_mzm.value},
          {"area_mrr_mm2", c.area_mrr.value},
          {"area_switch_mm2", c.area_switch.value},
          {"area_receiver_mm2", c.area_receiver.value},
          {"routing_overhead", c.routing_overhead},
          {"delay_base_s", c.delay_base.value},
          {"delay_per_port_s", c.delay_per_port.value}};
}

HardwareConfig hardware_from_json(const nlohmann::json& j, const HardwareConfig& base) {
  HardwareConfig c = base;
  try {
    io::reject_unknown_keys(
        j, {"format", "version", "M", "N", "l", "r", "f_op_hz", "mzm_energy_j", "mrr_hold_power_w", "adc_table_hz_w",
            "tia_energy_j_per_bit", "output_bits", "weight_mrr_model", "weight_mrr_explicit_count",
            "mrr_thermal_enabled", "switch_static_power_w", "weight_dac_power_w", "per_weight_drivers",
            "loss_base_db", "loss_per_input_db", "loss_per_output_db", "pd_sensitivity_floor_w", "area_mzm_mm2",
            "area_mrr_mm2", "area_switch_mm2", "area_receiver_mm2", "routing_overhead", "delay_base_s",
            "delay_per_port_s"},
        "hardware profile");
    if (j.contains("format") && j["format"] != "cirptc-hardware") throw ConfigError("not a hardware profile");
    if (j.contains("version") && j["version"] != 1) throw ConfigError("unsupported hardware profile version");
    auto size = [&](const char* k, std::size_t& v) { if (j.contains(k)) v = j[k].get<std::size_t>(); };
    auto real = [&](const char* k, auto& q) { if (j.contains(k)) q.value = j[k].get<double>(); };
    size("M", c.M);
    size("N", c.N);
    size("l", c.l);
    size("r", c.r);
    real("f_op_hz", c.f_op);
    real("mzm_energy_j", c.mzm_energy);
    real("mrr_hold_power_w", c.mrr_hold_power);
    if (j.contains("adc_table_hz_w")) {
      c.adc_table.clear();
      for (const auto& e : j["adc_table_hz_w"]) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("adc_table_hz_w entries are [Hz, W] pairs");
        c.adc_table.push_back({Hertz(e[0].get<double>()), Watts(e[1].get<double>())});
      }
    }
    real("tia_energy_j_per_bit", c.tia_energy_per_bit);
    if (j.contains("output_bits")) c.output_bits = j["output_bits"].get<int>();
    if (j.contains("weight_mrr_model")) c.weight_mrr_model = parse_model(j["weight_mrr_model"].get<std::string>());
    size("weight_mrr_explicit_count", c.weight_mrr_explicit);
    if (j.contains("mrr_thermal_enabled")) c.mrr_thermal_enabled = j["mrr_thermal_enabled"].get<bool>();
    real("switch_static_power_w", c.switch_static_power);
    real("weight_dac_power_w", c.weight_dac_power);
    if (j.contains("per_weight_drivers")) c.per_weight_drivers = j["per_weight_drivers"].get<bool>();
    real("loss_base_db", c.loss_base);
    real("loss_per_input_db", c.loss_per_input);
    real("loss_per_output_db", c.loss_per_output);
    real("pd_sensitivity_floor_w", c.pd_sensitivity_floor);
    real("area_mzm_mm2", c.area_mzm);
    real("area_mrr_mm2", c.area_mrr);
    real("area_switch_mm2", c.area_switch);
    real("area_receiver_mm2", c.area_receiver);
    if (j.contains("routing_overhead")) c.routing_overhead = j["routing_overhead"].get<double>();
    real("delay_base_s", c.delay_base);
    real("delay_per_port_s", c.delay_per_port);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hardware profile: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace cirptc::bench
