#pragma once

// Differentiable PIC estimator support: fitting the per-tile crosstalk
// operator Gamma so that Y(x) ~ Gamma x, the estimator forward pass
// W_q (Gamma x_q), and the backends that run lookup-mode inference through
// the tile simulator or a response table.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/full_range.hpp"
#include "cirptc/layers.hpp"
#include "cirptc/linalg.hpp"
#include "cirptc/lut.hpp"
#include "cirptc/tile_sim.hpp"

namespace cirptc::dpe {

struct CrosstalkEstimate {
  DenseMatrix gamma;
  double fit_residual = 0.0;  // RMS over samples of |y - Gamma x|
  std::size_t samples = 0;
  std::size_t rank = 0;
  double condition = 0.0;     // of the sample design matrix
  bool rank_deficient = false;
};

// Least squares over sample pairs. Fewer samples than the dimension raises
// RankError; a rank-deficient design returns the minimal-norm solution with
// rank_deficient set.
CrosstalkEstimate fit_gamma(const std::vector<RealVector>& xs, const std::vector<RealVector>& ys);

double prediction_residual(const DenseMatrix& gamma, const std::vector<RealVector>& xs,
                           const std::vector<RealVector>& ys);

struct TileSamples {
  std::vector<RealVector> xs, ys;
};

// Runs a tile programmed with the identity block (primary [1, 0, ..., 0]) on
// random input-grid vectors; y then measures Gamma directly.
TileSamples sample_tile(const sim::TileConfig& cfg, std::size_t count, std::uint64_t seed);
CrosstalkEstimate fit_gamma_from_tile(const sim::TileConfig& cfg, std::size_t count, std::uint64_t seed);

struct DpeOptions {
  int weight_bits = 6;
  quant::QuantSpec input{4, 0.0, 1.0};
  double noise_sigma = 0.0;          // absolute, per output
  std::mt19937_64* rng = nullptr;
};

// y = W_q (Gamma x_q) + noise, Gamma applied to every length-l input segment.
RealVector forward_dpe(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                       const DenseMatrix& gamma, const DpeOptions& opt = {});

// Lookup-mode backend calling the tile simulator directly. Programs are cached
// per layer id; call clear() after the weights change.
class PhysicalBackend : public nn::MvmBackend {
 public:
  explicit PhysicalBackend(sim::TileConfig cfg,
                           sim::FullRangeMethod method = sim::FullRangeMethod::sign_split);
  RealVector apply(std::size_t layer_id, const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                   double x_scale, std::uint64_t seed) override;
  void clear() { tiles_.clear(); }
  const sim::TileConfig& config() const noexcept { return cfg_; }

 private:
  sim::TileConfig cfg_;
  sim::FullRangeMethod method_;
  std::map<std::size_t, std::unique_ptr<sim::TiledBcm>> tiles_;
};

// Normalized sign-split halves of every block of a signed BCM, in the order
// build_lut expects (block (i, j): positive half, then negative half).
std::vector<std::vector<double>> lut_weight_blocks(const circulant::BlockCirculantMatrix& w, int weight_bits);

// Lookup-mode backend reading tabulated tile responses. Every block of every
// layer must be present in the table, otherwise LutKeyError.
class LutBackend : public nn::MvmBackend {
 public:
  explicit LutBackend(const sim::Lut& lut) : lut_(&lut) {}
  RealVector apply(std::size_t layer_id, const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                   double x_scale, std::uint64_t seed) override;
  void clear() { layers_.clear(); }

 private:
  struct Prepared {
    double scale = 0.0;
    std::vector<std::vector<std::uint32_t>> pos, neg;  // per block
  };
  const sim::Lut* lut_;
  std::map<std::size_t, Prepared> layers_;
};

}  // namespace cirptc::dpe
