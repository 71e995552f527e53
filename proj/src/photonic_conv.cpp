#include "cirptc/photonic_conv.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cirptc/circulant.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/full_range.hpp"

namespace cirptc::sim {

TileConfig folded_tile(const TileConfig& base, std::size_t folds) {
  TileConfig cfg = base;
  const auto ch = base.plan.base_channels();
  cfg.plan = photonics::WavelengthPlan(std::vector<double>(ch.begin(), ch.end()), base.plan.fsr_nm(), folds);
  return cfg;
}

std::size_t folds_for_kernel(std::size_t k, std::size_t l) { return (k * k + l - 1) / l; }

PhotonicConv convolve_photonic(const conv::ImageTensor& img, std::span<const double> kernel, std::size_t k,
                               const TileConfig& cfg, std::uint64_t seed) {
  if (kernel.size() != k * k) throw DimensionError("convolve_photonic: kernel must have k*k entries");
  if (img.height < k || img.width < k) throw DimensionError("convolve_photonic: image smaller than the kernel");
  const std::size_t l = cfg.l;
  if (cfg.folds() != folds_for_kernel(k, l))
    throw ConfigError("convolve_photonic: a " + std::to_string(k) + "x" + std::to_string(k) + " kernel needs " +
                      std::to_string(folds_for_kernel(k, l)) + " folds, the tile has " +
                      std::to_string(cfg.folds()));
  for (double v : img.data)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("convolve_photonic: pixels must lie in [0, 1]");

  PhotonicConv out;
  out.signed_kernel = std::any_of(kernel.begin(), kernel.end(), [](double v) { return v < 0.0; });
  const std::size_t oh = img.height - k + 1, ow = img.width - k + 1, positions = oh * ow;
  out.ideal = conv::ImageTensor(img.channels, oh, ow);
  out.simulated = conv::ImageTensor(img.channels, oh, ow);
  const DenseMatrix cols = conv::im2col_shared(img, k);
  const std::size_t n = cfg.inputs();

  // The tile computes the transposed extended BCM: one block row of r blocks.
  const circulant::ExtendedKernel ext = circulant::circulant_extend_kernel(kernel, l, 0);
  const circulant::BlockCirculantMatrix wt = circulant::bcm_transpose(ext.bcm);
  std::mt19937_64 rng(seed);
  std::mt19937_64* noise = cfg.noise.enabled && cfg.noise.sigma_rel > 0.0 ? &rng : nullptr;
  RealVector x(n, 0.0);

  if (!out.signed_kernel) {
    out.weight_scale = max_abs(wt.parameters());
    if (out.weight_scale == 0.0) return out;
    std::vector<double> normalized(wt.parameters().begin(), wt.parameters().end());
    for (auto& v : normalized) v /= out.weight_scale;
    const ProgrammedTile tile = program_tile(cfg, normalized);
    const circulant::BlockCirculantMatrix wq(1, cfg.folds(), l, tile.primaries);
    for (std::size_t c = 0; c < cols.cols(); ++c) {
      for (std::size_t i = 0; i < k * k; ++i) x[i] = cols(i, c);
      const RealVector y = run_tile(cfg, tile, x, noise);
      RealVector xq = quant::quantize(x, cfg.input_quant);
      const RealVector ref = circulant::bcm_matvec_direct(wq, xq);
      out.ideal.data[c] = out.weight_scale * ref[ext.target_column];
      out.simulated.data[c] = out.weight_scale * y[ext.target_column];
      ++out.tile_passes;
    }
  } else {
    const TiledBcm tiled(wt, cfg, FullRangeMethod::sign_split);
    const auto& wq = tiled.quantized();
    out.weight_scale = max_abs(wq.parameters());
    for (std::size_t c = 0; c < cols.cols(); ++c) {
      for (std::size_t i = 0; i < k * k; ++i) x[i] = cols(i, c);
      const RealVector y = tiled.apply(x, mix_seed(seed, c));
      const RealVector ref = circulant::bcm_matvec_direct(wq, quant::quantize(x, cfg.input_quant));
      out.ideal.data[c] = ref[ext.target_column];
      out.simulated.data[c] = y[ext.target_column];
      out.tile_passes += tiled.tile_passes();
    }
  }
  (void)positions;
  return out;
}

double normalized_rmse(const conv::ImageTensor& ideal, const conv::ImageTensor& simulated) {
  if (ideal.data.size() != simulated.data.size() || ideal.channels == 0)
    throw DimensionError("normalized_rmse: maps differ in size");
  const std::size_t m = ideal.height * ideal.width;
  double total = 0.0;
  for (std::size_t c = 0; c < ideal.channels; ++c) {
    double lo = ideal.data[c * m], hi = lo, sq = 0.0;
    for (std::size_t i = c * m; i < (c + 1) * m; ++i) {
      lo = std::min(lo, ideal.data[i]);
      hi = std::max(hi, ideal.data[i]);
      sq += (simulated.data[i] - ideal.data[i]) * (simulated.data[i] - ideal.data[i]);
    }
    if (hi == lo) throw DomainError("normalized_rmse: ideal map is constant");
    total += std::sqrt(sq / double(m)) / (hi - lo);
  }
  return total / double(ideal.channels);
}

double mean_normalized_rmse(const conv::ImageTensor& img, std::span<const double> kernel, std::size_t k,
                            const TileConfig& cfg, std::size_t seeds, std::uint64_t base_seed) {
  if (seeds == 0) throw ConfigError("mean_normalized_rmse: need at least one seed");
  double sum = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const PhotonicConv r = convolve_photonic(img, kernel, k, cfg, base_seed + s);
    sum += normalized_rmse(r.ideal, r.simulated);
  }
  return sum / double(seeds);
}

double calibrate_sigma_rel(TileConfig cfg, const conv::ImageTensor& img, std::span<const double> kernel,
                           std::size_t k, double target, std::size_t seeds, std::uint64_t base_seed) {
  if (!(target > 0.0)) throw ConfigError("calibrate_sigma_rel: target must be positive");
  cfg.noise.enabled = true;
  auto eval = [&](double sigma) {
    cfg.noise.sigma_rel = sigma;
    return mean_normalized_rmse(img, kernel, k, cfg, seeds, base_seed);
  };
  double lo = 0.0, hi = 1e-3;
  if (eval(lo) >= target) throw DomainError("calibrate_sigma_rel: deterministic error alone exceeds the target");
  while (eval(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 10.0) throw DomainError("calibrate_sigma_rel: target unreachable");
  }
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eval(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cirptc::sim
