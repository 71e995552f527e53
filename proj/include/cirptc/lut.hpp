#pragma once

// Tables of simulated tile responses keyed by quantization codes: for every
// programmed weight block, the outputs for an enumerated or sampled set of
// input code vectors.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cirptc/tile_sim.hpp"

namespace cirptc::sim {

struct LutPolicy {
  enum class Kind { full, random };
  Kind kind = Kind::full;
  std::size_t samples = 0;  // random policy: distinct input vectors per weight block
  std::uint64_t seed = 0;
};

class Lut {
 public:
  Lut() = default;
  Lut(std::size_t l, int weight_bits, int input_bits);

  std::size_t order() const noexcept { return l_; }
  int weight_bits() const noexcept { return weight_bits_; }
  int input_bits() const noexcept { return input_bits_; }
  std::size_t size() const noexcept { return table_.size(); }
  std::size_t weight_blocks() const;
  std::size_t input_keys(std::span<const std::uint32_t> weight_codes) const;

  void insert(std::span<const std::uint32_t> weight_codes, std::span<const std::uint32_t> input_codes,
              RealVector y);
  // LutKeyError when the pair was never tabulated.
  const RealVector& lookup(std::span<const std::uint32_t> weight_codes,
                           std::span<const std::uint32_t> input_codes) const;
  bool contains(std::span<const std::uint32_t> weight_codes, std::span<const std::uint32_t> input_codes) const;

  // JSON lines: a header object, then one {"w","x","y"} object per entry in
  // key order.
  std::string serialize() const;
  static Lut parse(const std::string& text);
  void save(const std::string& path) const;
  static Lut load(const std::string& path);

  bool operator==(const Lut&) const = default;

 private:
  std::string key(std::span<const std::uint32_t> w, std::span<const std::uint32_t> x) const;

  std::size_t l_ = 0;
  int weight_bits_ = 0, input_bits_ = 0;
  std::map<std::string, RealVector> table_;
};

// Each weight block holds l normalized primary values on the weight codebook.
Lut build_lut(const TileConfig& cfg, const std::vector<std::vector<double>>& weight_blocks,
              const LutPolicy& policy);

std::vector<std::uint32_t> codes_of(std::span<const double> values, const quant::QuantSpec& q);

}  // namespace cirptc::sim
