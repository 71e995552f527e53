#include "cirptc/full_range.hpp"

#include <algorithm>
#include <random>

#include "cirptc/errors.hpp"
#include "cirptc/quant.hpp"

namespace cirptc::sim {

RealVector combine_passes(double scale, std::span<const double> first, std::span<const double> second) {
  if (first.size() != second.size()) throw DimensionError("combine_passes: pass lengths differ");
  RealVector y(first.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = scale * (first[i] - second[i]);
  return y;
}

circulant::BlockCirculantMatrix quantize_signed(const circulant::BlockCirculantMatrix& w, int bits) {
  const quant::QuantSpec spec = quant::symmetric_spec(w.parameters(), bits);
  circulant::BlockCirculantMatrix out = w;
  for (auto& v : out.parameters()) v = quant::quantize(v, spec);
  return out;
}

namespace {

void check_inputs(std::span<const double> x, double x_scale) {
  if (!(x_scale > 0.0)) throw ConfigError("input scale must be positive");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0)) throw DomainError("full-range input element " + std::to_string(i) + " is negative");
}

RealVector normalized(std::span<const double> x, double x_scale) {
  RealVector xn(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xn[i] = x[i] / x_scale;
    if (xn[i] > 1.0 + 1e-12)
      throw DomainError("input element " + std::to_string(i) + " exceeds the input scale");
  }
  return xn;
}

struct SplitBlocks {
  std::vector<double> first, second;
  double scale = 0.0;
  bool quantize_second = true;
};

// Normalized [0, 1] parameters of the two passes for signed-quantized weights.
SplitBlocks split(std::span<const double> wq, double m, FullRangeMethod method) {
  SplitBlocks s;
  s.first.resize(wq.size());
  s.second.resize(wq.size());
  if (method == FullRangeMethod::sign_split) {
    for (std::size_t i = 0; i < wq.size(); ++i) {
      s.first[i] = std::max(wq[i], 0.0) / m;
      s.second[i] = std::max(-wq[i], 0.0) / m;
    }
    s.scale = m;
  } else {
    // Shift the symmetric range [-m, m] onto [0, 1]; the reference holds the
    // encoding of zero, programmed as an analog calibration level.
    for (std::size_t i = 0; i < wq.size(); ++i) {
      s.first[i] = std::clamp((wq[i] + m) / (2.0 * m), 0.0, 1.0);
      s.second[i] = 0.5;
    }
    s.scale = 2.0 * m;
    s.quantize_second = false;
  }
  return s;
}

}  // namespace

RealVector fullrange_reference(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                               const TileConfig& cfg, double x_scale) {
  check_inputs(x, x_scale);
  const auto wq = quantize_signed(w, cfg.weight_quant.bits);
  RealVector xq = normalized(x, x_scale);
  for (auto& v : xq) v = quant::quantize(v, cfg.input_quant) * x_scale;
  return circulant::bcm_matvec_direct(wq, xq);
}

RealVector forward_fullrange(const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                             const TileConfig& cfg, FullRangeMethod method, std::uint64_t seed, double x_scale) {
  if (w.order() != cfg.l || w.block_rows() != 1 || w.block_cols() != cfg.folds())
    throw DimensionError("forward_fullrange: BCM must be 1 x r blocks of the tile order");
  check_inputs(x, x_scale);
  const RealVector xn = normalized(x, x_scale);
  const auto wq = quantize_signed(w, cfg.weight_quant.bits);
  const double m = max_abs(wq.parameters());
  if (m == 0.0) return RealVector(cfg.l, 0.0);
  const SplitBlocks s = split(wq.parameters(), m, method);
  const RealVector a = run_tile(cfg, program_tile(cfg, s.first), xn, mix_seed(seed, 0));
  const RealVector b = run_tile(cfg, program_tile(cfg, s.second, s.quantize_second), xn, mix_seed(seed, 1));
  return combine_passes(s.scale * x_scale, a, b);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = base ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TiledBcm::TiledBcm(const circulant::BlockCirculantMatrix& w, TileConfig cfg, FullRangeMethod method)
    : cfg_(std::move(cfg)), method_(method) {
  cfg_.validate();
  if (w.order() != cfg_.l) throw DimensionError("TiledBcm: block order differs from the tile order");
  const std::size_t r = cfg_.folds(), l = cfg_.l;
  wq_ = quantize_signed(w, cfg_.weight_quant.bits);
  const double m = max_abs(wq_.parameters());
  groups_ = (w.block_cols() + r - 1) / r;
  if (m == 0.0) return;
  for (std::size_t i = 0; i < w.block_rows(); ++i)
    for (std::size_t g = 0; g < groups_; ++g) {
      std::vector<double> params(r * l, 0.0);
      for (std::size_t f = 0; f < r && g * r + f < w.block_cols(); ++f) {
        const auto b = wq_.block(i, g * r + f);
        std::copy(b.begin(), b.end(), params.begin() + long(f * l));
      }
      const SplitBlocks s = split(params, m, method_);
      scale_ = s.scale;
      first_.push_back(program_tile(cfg_, s.first));
      second_.push_back(program_tile(cfg_, s.second, s.quantize_second));
    }
}

RealVector TiledBcm::apply(std::span<const double> x, std::uint64_t seed, double x_scale) const {
  if (x.size() != wq_.cols())
    throw DimensionError("TiledBcm::apply: expected " + std::to_string(wq_.cols()) + " inputs");
  check_inputs(x, x_scale);
  RealVector y(wq_.rows(), 0.0);
  if (first_.empty()) return y;
  const std::size_t r = cfg_.folds(), l = cfg_.l;
  RealVector xn = normalized(x, x_scale);
  xn.resize(groups_ * r * l, 0.0);
  std::mt19937_64 rng(seed);
  std::mt19937_64* noise = cfg_.noise.enabled && cfg_.noise.sigma_rel > 0.0 ? &rng : nullptr;
  for (std::size_t i = 0; i < wq_.block_rows(); ++i)
    for (std::size_t g = 0; g < groups_; ++g) {
      const std::span<const double> seg(xn.data() + g * r * l, r * l);
      const std::size_t t = i * groups_ + g;
      const RealVector a = run_tile(cfg_, first_[t], seg, noise);
      const RealVector b = run_tile(cfg_, second_[t], seg, noise);
      for (std::size_t k = 0; k < l; ++k) y[i * l + k] += scale_ * x_scale * (a[k] - b[k]);
    }
  return y;
}

}  // namespace cirptc::sim
