#pragma once

// Signed weights on the nonnegative crossbar: two time-multiplexed physical
// passes whose digital difference restores the sign. Any additive offset
// common to both passes (dark current in particular) cancels.

#include <cstdint>
#include <span>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/tile_sim.hpp"

namespace cirptc::sim {

enum class FullRangeMethod { sign_split, bias_reference };

// scale * (first - second), elementwise.
RealVector combine_passes(double scale, std::span<const double> first, std::span<const double> second);

// Symmetric signed quantization of all weights on cfg.weight_quant.bits.
circulant::BlockCirculantMatrix quantize_signed(const circulant::BlockCirculantMatrix& w, int bits);

// Exact product of the signed-quantized W and the input-quantized x.
RealVector fullrange_reference(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                               const TileConfig& cfg, double x_scale = 1.0);

// W is one block row of r blocks (r = cfg folds). x >= 0, at most x_scale.
RealVector forward_fullrange(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                             const TileConfig& cfg, FullRangeMethod method, std::uint64_t seed,
                             double x_scale = 1.0);

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// A whole BCM of any size mapped onto repeated tile passes: every block row
// and every group of r block columns is one programmed tile (two with the
// signed methods). Partial sums are accumulated digitally.
class TiledBcm {
 public:
  TiledBcm(const circulant::BlockCirculantMatrix& w, TileConfig cfg,
           FullRangeMethod method = FullRangeMethod::sign_split);

  // x has w.cols() entries in [0, x_scale].
  RealVector apply(std::span<const double> x, std::uint64_t seed, double x_scale = 1.0) const;

  const circulant::BlockCirculantMatrix& quantized() const noexcept { return wq_; }
  const TileConfig& config() const noexcept { return cfg_; }
  std::size_t tile_passes() const noexcept { return first_.size() + second_.size(); }

 private:
  TileConfig cfg_;
  FullRangeMethod method_;
  circulant::BlockCirculantMatrix wq_;
  double scale_ = 0.0;
  std::size_t groups_ = 0;
  std::vector<ProgrammedTile> first_, second_;  // [block_row * groups + group]
};

}  // namespace cirptc::sim
