#pragma once

// File formats: binary PGM/PPM images, IDX image/label files, CIFAR-10
// binary batches and the model checkpoint container.
//
// Checkpoint layout (all integers little-endian, doubles IEEE-754 binary64
// little-endian):
//   "CPTC"  u32 version(=1)
//   u32 c, h, w   u32 classes   i32 weight_bits   i32 act_bits
//   u32 layer_count, then per layer:
//     u32 kind   u64 in   u64 out   u64 k   u64 order   f64 act_hi
//   u32 tensor_count, then per tensor (parameters in layer order, then
//     buffers in layer order): u64 n, n x f64
//   u64 gamma_n, gamma_n^2 x f64 (row-major; 0 when absent)
//   u64 seed   u64 rng_len, rng_len bytes (text state of std::mt19937_64)
//   "END!"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cirptc/conv_lowering.hpp"
#include "cirptc/dataset.hpp"
#include "cirptc/model.hpp"

namespace cirptc::io {

// Values mapped linearly from [lo, hi] to 0..255, rounded, clamped.
std::vector<std::uint8_t> to_gray8(std::span<const double> values, double lo, double hi);
std::string encode_pgm(std::size_t width, std::size_t height, std::span<const std::uint8_t> pixels);
void write_pgm(const std::string& path, std::size_t width, std::size_t height, std::span<const std::uint8_t> pixels);
// Channel c of an image tensor.
void write_pgm(const std::string& path, const conv::ImageTensor& img, std::size_t channel, double lo, double hi);

// P5 (one channel) or P6 (three channels), maxval 255, values / 255.
conv::ImageTensor parse_pnm(const std::string& bytes);
conv::ImageTensor read_pnm(const std::string& path);
std::string encode_ppm(const conv::ImageTensor& img);

data::Dataset parse_idx(const std::string& images, const std::string& labels, std::size_t classes = 10);
data::Dataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t classes = 10);
std::string encode_idx_images(const data::Dataset& d);
std::string encode_idx_labels(const data::Dataset& d);

// Records of 1 label byte + 3072 pixel bytes (channel planes of 32 x 32).
data::Dataset parse_cifar(const std::string& bytes);
data::Dataset load_cifar(const std::string& path);
std::string encode_cifar(const data::Dataset& d);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nn::Model model;
  DenseMatrix gamma;  // crosstalk operator used in training (may be empty)
  std::uint64_t seed = 0;
  std::string rng_state;
};

std::string serialize_checkpoint(const Checkpoint& ck);
Checkpoint parse_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cirptc::io
