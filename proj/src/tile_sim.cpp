#include "cirptc/tile_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"

namespace cirptc::sim {

using photonics::Branch;
using photonics::MrrParams;

void TileConfig::validate() const {
  if (l == 0) throw ConfigError("tile order must be positive");
  if (plan.slots() != l)
    throw ConfigError("wavelength plan has " + std::to_string(plan.slots()) + " slots, tile order is " +
                      std::to_string(l));
  if (!weight_branches.empty() && weight_branches.size() != l)
    throw ConfigError("weight_branches needs one entry per slot");
  if (std::abs(plan.fsr_nm() - switch_mrr.fsr_nm) > 1e-9)
    throw ConfigError("switch FSR must equal the plan FSR for folding to line up");
  weight_quant.validate();
  input_quant.validate();
  if (weight_quant.lo != 0.0 || weight_quant.hi != 1.0 || input_quant.lo != 0.0 || input_quant.hi != 1.0)
    throw ConfigError("tile quantizers operate on normalized [0, 1] values");
  if (noise.sigma_rel < 0.0) throw ConfigError("noise sigma_rel must be nonnegative");
  if (!(channel_power_w > 0.0)) throw ConfigError("channel power must be positive");
  if (!(weight_headroom > 0.0 && weight_headroom <= 1.0)) throw ConfigError("weight headroom must be in (0, 1]");
  if (adc_bits < 0 || adc_bits > 24) throw ConfigError("adc_bits must be in [0, 24]");
  pd.validate();
}

TileConfig prototype_tile() {
  TileConfig cfg;
  cfg.weight_branches = {Branch::left, Branch::left, Branch::left, Branch::right};
  return cfg;
}

namespace {

MrrParams weight_ring(const TileConfig& cfg, std::size_t logical) {
  MrrParams p = cfg.weight_mrr;
  p.resonant_wavelength_nm = cfg.plan.channel(logical);
  if (!cfg.weight_branches.empty()) p.branch = cfg.weight_branches[logical % cfg.l];
  return p;
}

struct Derived {
  std::vector<double> responsivity;  // per channel
  std::vector<double> mzm_table;     // per input code
  std::vector<double> switch_drop;   // [(f * l + s0) * l + s]
  double adc_full_scale = 0.0;
};

Derived derive(const TileConfig& cfg, const TileCalibration& cal) {
  const std::size_t l = cfg.l, r = cfg.folds();
  Derived d;
  d.responsivity.resize(r * l);
  for (std::size_t ch = 0; ch < r * l; ++ch) d.responsivity[ch] = cfg.pd.responsivity_at(cfg.plan.channel(ch));
  d.mzm_table.resize(cfg.input_quant.levels());
  for (std::uint32_t c = 0; c < d.mzm_table.size(); ++c) {
    const double target = cal.mzm_floor + cal.mzm_span * quant::from_code(c, cfg.input_quant);
    d.mzm_table[c] = photonics::mzm_transmission(photonics::mzm_drive_for(target, cfg.mzm), cfg.mzm);
  }
  d.switch_drop.resize(r * l * l);
  for (std::size_t f = 0; f < r; ++f)
    for (std::size_t s0 = 0; s0 < l; ++s0) {
      MrrParams sw = cfg.switch_mrr;
      sw.resonant_wavelength_nm = cfg.plan.channel(0, s0);
      for (std::size_t s = 0; s < l; ++s)
        d.switch_drop[(f * l + s0) * l + s] =
            s == s0 ? cal.switch_peak : photonics::mrr_drop_transmission(cfg.plan.channel(f, s), sw);
    }
  const double k = cfg.channel_power_w / double(l);
  const double w_peak = cfg.weight_mrr.peak();
  double worst = 0.0;
  for (std::size_t c = 0; c < l; ++c) {
    double i = cfg.pd.dark_current_a;
    for (std::size_t f = 0; f < r; ++f)
      for (std::size_t row = 0; row < l; ++row) {
        const std::size_t s0 = (c + l - row) % l;
        for (std::size_t s = 0; s < l; ++s) {
          if (!cfg.crosstalk_on && s != s0) continue;
          i += k * d.responsivity[f * l + s] * w_peak * cfg.mzm.peak() * d.switch_drop[(f * l + s0) * l + s];
        }
      }
    worst = std::max(worst, i);
  }
  // Leaves headroom for positive noise excursions.
  d.adc_full_scale = 1.25 * worst;
  return d;
}

std::vector<double> checked_quantize(std::span<const double> v, const quant::QuantSpec& q, const char* what,
                                     bool do_quantize) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double tol = 1e-12;
    if (!(v[i] >= q.lo - tol && v[i] <= q.hi + tol))
      throw DomainError(std::string(what) + " element " + std::to_string(i) + " = " + std::to_string(v[i]) +
                        " outside [" + std::to_string(q.lo) + ", " + std::to_string(q.hi) + "]");
    out[i] = do_quantize ? quant::quantize(v[i], q) : std::clamp(v[i], q.lo, q.hi);
  }
  return out;
}

}  // namespace

TileCalibration calibrate_tile(const TileConfig& cfg) {
  cfg.validate();
  TileCalibration cal;
  double t_lo = 0.0;
  for (std::size_t ch = 0; ch < cfg.plan.size(); ++ch)
    t_lo = std::max(t_lo, photonics::mrr_detuned_transmission(cfg.max_detuning_nm, weight_ring(cfg, ch)));
  cal.t_lo = t_lo;
  cal.t_span = cfg.weight_headroom * (cfg.weight_mrr.peak() - t_lo);
  cal.mzm_floor = cfg.mzm.floor();
  cal.mzm_span = cfg.mzm.peak() - cfg.mzm.floor();
  cal.switch_peak = cfg.switch_mrr.peak();
  cal.r_ref = cfg.pd.responsivity_at(cfg.plan.channel(0));
  if (!(cal.r_ref > 0.0)) throw ConfigError("reference channel has zero responsivity");
  const double k = cfg.channel_power_w / double(cfg.l);
  cal.gain = k * cal.switch_peak * cal.r_ref * cal.t_span * cal.mzm_span;
  cal.full_scale_current = cal.gain * double(cfg.inputs());
  return cal;
}

struct TileTables {
  TileCalibration cal;
  Derived derived;
};

ProgrammedTile program_tile(const TileConfig& cfg, std::span<const double> primaries, bool quantize) {
  cfg.validate();
  const std::size_t l = cfg.l, r = cfg.folds();
  if (primaries.size() != r * l)
    throw DimensionError("program_tile: expected " + std::to_string(r * l) + " weights, got " +
                         std::to_string(primaries.size()));
  ProgrammedTile t;
  t.folds = r;
  t.l = l;
  t.compensated = cfg.responsivity_compensation;
  t.primaries = checked_quantize(primaries, cfg.weight_quant, "weight", quantize);
  t.coefficients.resize(r * l);
  for (std::size_t f = 0; f < r; ++f) {
    const auto col = circulant::first_column(std::span<const double>(t.primaries).subspan(f * l, l));
    std::copy(col.begin(), col.end(), t.coefficients.begin() + long(f * l));
  }
  const TileCalibration cal = calibrate_tile(cfg);
  t.tables = std::make_shared<const TileTables>(TileTables{cal, derive(cfg, cal)});
  const double peak = cfg.weight_mrr.peak();
  t.detuning_nm.resize(r * l);
  t.transmission.resize(r * l);
  for (std::size_t ch = 0; ch < r * l; ++ch) {
    const double resp = cfg.pd.responsivity_at(cfg.plan.channel(ch));
    const double g = cfg.responsivity_compensation ? cal.r_ref / resp : 1.0;
    const double target = cal.t_lo + g * t.coefficients[ch] * cal.t_span;
    if (target > peak * (1.0 + 1e-12)) {
      const auto [f, s] = cfg.plan.fold_slot(ch);
      throw DeviceRangeError("weight ring fold " + std::to_string(f) + " slot " + std::to_string(s) + " at " +
                             std::to_string(cfg.plan.channel(ch)) + " nm needs transmission " +
                             std::to_string(target) + " above its peak " + std::to_string(peak) +
                             " (compensation gain " + std::to_string(g) + ")");
    }
    const MrrParams ring = weight_ring(cfg, ch);
    t.detuning_nm[ch] = photonics::mrr_detuning_for(std::min(target, peak), cfg.max_detuning_nm, ring);
    t.transmission[ch] = photonics::mrr_detuned_transmission(t.detuning_nm[ch], ring);
  }
  return t;
}

RealVector run_tile(const TileConfig& cfg, const ProgrammedTile& tile, std::span<const double> x,
                    std::uint64_t seed, TileTrace* trace) {
  if (cfg.noise.enabled && cfg.noise.sigma_rel > 0.0) {
    std::mt19937_64 rng(seed);
    return run_tile(cfg, tile, x, rng, trace);
  }
  return run_tile(cfg, tile, x, nullptr, trace);
}

RealVector run_tile(const TileConfig& cfg, const ProgrammedTile& tile, std::span<const double> x,
                    std::mt19937_64& rng, TileTrace* trace) {
  return run_tile(cfg, tile, x, &rng, trace);
}

RealVector run_tile(const TileConfig& cfg, const ProgrammedTile& tile, std::span<const double> x,
                    std::mt19937_64* rng, TileTrace* trace) {
  const std::size_t l = cfg.l, r = cfg.folds();
  if (tile.l != l || tile.folds != r) throw DimensionError("run_tile: tile was programmed for another config");
  if (x.size() != r * l)
    throw DimensionError("run_tile: expected " + std::to_string(r * l) + " inputs, got " + std::to_string(x.size()));
  if (!tile.tables) throw ConfigError("run_tile: tile is not programmed");
  const TileCalibration& cal = tile.tables->cal;
  const Derived& d = tile.tables->derived;
  std::vector<std::uint32_t> codes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -1e-12 && x[i] <= 1.0 + 1e-12))
      throw DomainError("input element " + std::to_string(i) + " = " + std::to_string(x[i]) + " outside [0, 1]");
    codes[i] = quant::code(x[i], cfg.input_quant);
  }
  const double k = cfg.channel_power_w / double(l);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVector y(l);
  if (trace) {
    trace->currents_a.assign(l, 0.0);
    trace->floor_a.assign(l, 0.0);
  }
  for (std::size_t c = 0; c < l; ++c) {
    double current = cfg.pd.dark_current_a, floor = cfg.pd.dark_current_a, offset = 0.0;
    for (std::size_t f = 0; f < r; ++f)
      for (std::size_t row = 0; row < l; ++row) {
        const std::size_t s0 = (c + l - row) % l;
        const double tm = d.mzm_table[codes[f * l + row]];
        for (std::size_t s = 0; s < l; ++s) {
          if (!cfg.crosstalk_on && s != s0) continue;
          const std::size_t ch = f * l + s;
          const double path = k * d.responsivity[ch] * tile.transmission[ch] * d.switch_drop[(f * l + s0) * l + s];
          current += path * tm;
          floor += path * cal.mzm_floor;
        }
        // Offsets the digital side can predict from the programmed codes.
        const std::size_t ch0 = f * l + s0;
        offset += k * cal.switch_peak *
                  (d.responsivity[ch0] * cal.t_lo * tm + cal.r_ref * tile.coefficients[ch0] * cal.t_span * cal.mzm_floor);
      }
    if (cfg.noise.enabled && cfg.noise.sigma_rel > 0.0) {
      if (rng == nullptr) throw ConfigError("run_tile: noise enabled without a generator");
      current += cfg.noise.sigma_rel * cal.full_scale_current * normal(*rng);
    }
    if (cfg.adc_bits > 0) {
      const double levels = std::ldexp(1.0, cfg.adc_bits) - 1.0;
      const double step = d.adc_full_scale / levels;
      current = std::round(std::clamp(current, 0.0, d.adc_full_scale) / step) * step;
    }
    if (trace) {
      trace->currents_a[c] = current;
      trace->floor_a[c] = floor;
    }
    const double dark = cfg.dark_subtract ? cfg.pd.dark_current_a : 0.0;
    y[c] = (current - dark - offset) / cal.gain;
  }
  return y;
}

RealVector forward_ideal(std::span<const double> primaries, std::span<const double> x, const TileConfig& cfg) {
  cfg.validate();
  const std::size_t l = cfg.l, r = cfg.folds();
  if (primaries.size() != r * l || x.size() != r * l) throw DimensionError("forward_ideal: length mismatch");
  const auto wq = checked_quantize(primaries, cfg.weight_quant, "weight", true);
  const auto xq = checked_quantize(x, cfg.input_quant, "input", true);
  const circulant::BlockCirculantMatrix w(1, r, l, wq);
  return circulant::bcm_matvec_direct(w, xq);
}

RealVector forward_physical(std::span<const double> primary, std::span<const double> x, const TileConfig& cfg,
                            std::uint64_t seed, TileTrace* trace) {
  return run_tile(cfg, program_tile(cfg, primary), x, seed, trace);
}

RealVector forward_folded(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                          const TileConfig& cfg, std::uint64_t seed) {
  if (w.order() != cfg.l || w.block_rows() != 1 || w.block_cols() != cfg.folds())
    throw DimensionError("forward_folded: BCM must be 1 x r blocks of the tile order");
  return run_tile(cfg, program_tile(cfg, w.parameters()), x, seed);
}

double output_lsb(const TileConfig& cfg) {
  double lsb = cfg.weight_quant.step() * cfg.input_quant.step();
  if (cfg.adc_bits > 0) {
    const TileCalibration cal = calibrate_tile(cfg);
    const Derived d = derive(cfg, cal);
    lsb = std::max(lsb, d.adc_full_scale / (std::ldexp(1.0, cfg.adc_bits) - 1.0) / cal.gain);
  }
  return lsb;
}

StreamResult run_mvm_stream(std::span<const double> primaries, const DenseMatrix& x_columns, const TileConfig& cfg,
                            double symbol_period_s) {
  if (!(symbol_period_s > 0.0)) throw ConfigError("symbol period must be positive");
  if (x_columns.rows() != cfg.inputs()) throw DimensionError("run_mvm_stream: input rows must equal r * l");
  const ProgrammedTile tile = program_tile(cfg, primaries);
  StreamResult out;
  out.symbol_period_s = symbol_period_s;
  out.rate_baud = 1.0 / symbol_period_s;
  RealVector x(x_columns.rows());
  for (std::size_t p = 0; p < x_columns.cols(); ++p) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x_columns(i, p);
    const RealVector ideal = forward_ideal(primaries, x, cfg);
    const RealVector sim = run_tile(cfg, tile, x, cfg.noise.seed ^ std::uint64_t(p));
    for (std::size_t port = 0; port < ideal.size(); ++port)
      out.records.push_back({p, double(p) * symbol_period_s, port, ideal[port], sim[port]});
  }
  return out;
}

void write_stream_csv(const StreamResult& s, const std::string& path) {
  std::ostringstream os;
  os << "slot,time_s,port,ideal,simulated\n";
  for (const auto& r : s.records)
    os << r.slot << ',' << io::format_double(r.time_s) << ',' << r.port << ',' << io::format_double(r.ideal) << ','
       << io::format_double(r.simulated) << '\n';
  io::write_file_atomic(path, os.str());
}

}  // namespace cirptc::sim
