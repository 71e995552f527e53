#pragma once

// Image convolution on the tile: every k x k window is one column of the
// shared-kernel im2col matrix, and the kernel is placed in one column of an
// extended BCM so a single folded tile pass (r = ceil(k^2 / l)) returns the
// window's dot product at the target output.

#include <cstdint>
#include <span>

#include "cirptc/conv_lowering.hpp"
#include "cirptc/tile_sim.hpp"

namespace cirptc::sim {

// The prototype tile with the plan folded r times.
TileConfig folded_tile(const TileConfig& base, std::size_t folds);
// Folds needed for a k x k kernel on an order-l tile.
std::size_t folds_for_kernel(std::size_t k, std::size_t l);

struct PhotonicConv {
  conv::ImageTensor ideal;      // exact arithmetic on the same quantized codes
  conv::ImageTensor simulated;
  double weight_scale = 0.0;    // kernel = weight_scale * normalized codes
  bool signed_kernel = false;
  std::size_t tile_passes = 0;
};

// Kernel shared by all channels. Nonnegative kernels run one pass per window;
// signed kernels run the two sign-split passes. Pixels must lie in [0, 1].
PhotonicConv convolve_photonic(const conv::ImageTensor& img, std::span<const double> kernel, std::size_t k,
                               const TileConfig& cfg, std::uint64_t seed);

// Mean over channels of RMSE(simulated - ideal) / (max - min of ideal).
double normalized_rmse(const conv::ImageTensor& ideal, const conv::ImageTensor& simulated);

// Mean normalized RMSE over seeds base_seed .. base_seed + seeds - 1.
double mean_normalized_rmse(const conv::ImageTensor& img, std::span<const double> kernel, std::size_t k,
                            const TileConfig& cfg, std::size_t seeds, std::uint64_t base_seed = 1);

// sigma_rel giving the target mean normalized RMSE (bisection with common
// random numbers, so the objective is deterministic and monotone).
double calibrate_sigma_rel(TileConfig cfg, const conv::ImageTensor& img, std::span<const double> kernel,
                           std::size_t k, double target, std::size_t seeds, std::uint64_t base_seed = 1);

// The 3 x 3 blur and horizontal-gradient (Sobel) kernels of the demos.
inline constexpr double kBlurKernel[9] = {1.0 / 16, 2.0 / 16, 1.0 / 16, 2.0 / 16, 4.0 / 16,
                                          2.0 / 16, 1.0 / 16, 2.0 / 16, 1.0 / 16};
inline constexpr double kSobelKernel[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};

}  // namespace cirptc::sim
