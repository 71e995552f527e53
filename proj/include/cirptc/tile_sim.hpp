#pragma once

// One order-l crossbar tile. Input row i carries every WDM channel, weighted
// by a shared bank of weight MRRs (one per channel) and scaled by a broadband
// MZM per (fold, row). The switch at (row i, column c) is tuned to slot
// (c - i) mod l and drops that slot from every fold onto column c's
// photodetector. Programming slot s with the first-column coefficient c[s] of
// a block makes column c read sum_i c[(c - i) mod l] x_i, i.e. the circulant
// product. With r folds the same switches route r channel groups at once and
// the tile computes an l x (r l) block-circulant product.
//
// All tile-level weights and inputs are normalized to [0, 1]; callers handle
// signed weights and scaling (see full_range.hpp).

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/linalg.hpp"
#include "cirptc/photonics.hpp"
#include "cirptc/quant.hpp"

namespace cirptc::sim {

struct NoiseModel {
  double sigma_rel = 0.0;  // std of output deviation relative to full-scale signal current
  std::uint64_t seed = 0;
  bool enabled = false;
};

struct TileConfig {
  std::size_t l = 4;
  photonics::WavelengthPlan plan = photonics::prototype_plan();
  photonics::MzmParams mzm;
  photonics::MrrParams weight_mrr;
  // Per-slot branch of the weight rings; empty means weight_mrr.branch everywhere.
  std::vector<photonics::Branch> weight_branches;
  photonics::MrrParams switch_mrr;
  photonics::PdParams pd;
  quant::QuantSpec weight_quant{6, 0.0, 1.0};
  quant::QuantSpec input_quant{4, 0.0, 1.0};
  NoiseModel noise;
  bool crosstalk_on = false;
  bool dark_subtract = true;
  bool responsivity_compensation = true;
  double channel_power_w = 1e-3;
  // Fraction of the MRR transmission span used for weights; leaves room for
  // responsivity compensation gains above 1.
  double weight_headroom = 0.8;
  double max_detuning_nm = 1.0;
  int adc_bits = 0;  // 0: no output digitization

  std::size_t folds() const { return plan.folds(); }
  std::size_t inputs() const { return l * plan.folds(); }
  void validate() const;
};

// The prototype tile: order 4, the four published channels, weight ring at
// 1563.0 nm on the right branch.
TileConfig prototype_tile();

// Calibration constants that map photocurrent back to numeric units.
struct TileCalibration {
  double t_lo = 0.0;          // weight ring transmission at full detuning
  double t_span = 0.0;        // headroom * (peak - t_lo)
  double mzm_floor = 0.0;
  double mzm_span = 0.0;      // peak - floor
  double switch_peak = 0.0;
  double r_ref = 0.0;         // responsivity of the reference channel (fold 0, slot 0)
  double gain = 0.0;          // A per unit of normalized output
  double full_scale_current = 0.0;  // gain * r * l
};

TileCalibration calibrate_tile(const TileConfig& cfg);

struct TileTables;

// Programmed weights plus the calibration tables derived from the config they
// were programmed with; run_tile must be given the same config.
struct ProgrammedTile {
  std::size_t folds = 1, l = 0;
  std::vector<double> primaries;     // r * l quantized first-row values
  std::vector<double> coefficients;  // r * l first-column values, logical channel order
  std::vector<double> detuning_nm;   // per channel
  std::vector<double> transmission;  // achieved weight-ring drop per channel
  bool compensated = true;
  std::shared_ptr<const TileTables> tables;
};

// Quantizes and programs r blocks (fold f occupies primaries[f*l, f*l+l)).
// quantize=false programs the values as given (used for reference levels).
ProgrammedTile program_tile(const TileConfig& cfg, std::span<const double> primaries,
                            bool quantize = true);

struct TileTrace {
  std::vector<double> currents_a;     // raw photocurrent per column, before any correction
  std::vector<double> floor_a;        // photocurrent the same program gives at x = 0
};

// Physical forward pass. `x` has r*l entries in [0, 1] and is quantized to the
// input grid. The seed drives the Gaussian deviation only.
RealVector run_tile(const TileConfig& cfg, const ProgrammedTile& tile, std::span<const double> x,
                    std::uint64_t seed, TileTrace* trace = nullptr);
// Same, drawing the deviation from a caller-owned generator (nullptr is
// allowed when noise is disabled).
RealVector run_tile(const TileConfig& cfg, const ProgrammedTile& tile, std::span<const double> x,
                    std::mt19937_64& rng, TileTrace* trace = nullptr);
RealVector run_tile(const TileConfig& cfg, const ProgrammedTile& tile, std::span<const double> x,
                    std::mt19937_64* rng, TileTrace* trace = nullptr);

// Quantized weights and inputs, exact arithmetic, physics bypassed.
RealVector forward_ideal(std::span<const double> primaries, std::span<const double> x,
                         const TileConfig& cfg);

// Single block (r must be 1 in cfg.plan) through the full physical pipeline.
RealVector forward_physical(std::span<const double> primary, std::span<const double> x,
                            const TileConfig& cfg, std::uint64_t seed, TileTrace* trace = nullptr);

// l x (r l) BCM (one block row, r block columns) on an r-fold plan.
RealVector forward_folded(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                          const TileConfig& cfg, std::uint64_t seed);

// Output resolution used for "within k LSB" checks: the product grid step
// (weight step * input step), or the ADC step referred to the output when
// that is coarser.
double output_lsb(const TileConfig& cfg);

struct StreamRecord {
  std::size_t slot = 0;
  double time_s = 0.0;
  std::size_t port = 0;
  double ideal = 0.0;
  double simulated = 0.0;
};

struct StreamResult {
  std::vector<StreamRecord> records;
  double symbol_period_s = 0.0;
  double rate_baud = 0.0;
};

// Column p of X is sent in slot p at t = p * tau with seed noise.seed ^ p.
StreamResult run_mvm_stream(std::span<const double> primaries, const DenseMatrix& x_columns,
                            const TileConfig& cfg, double symbol_period_s);

void write_stream_csv(const StreamResult& s, const std::string& path);

}  // namespace cirptc::sim
