#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cirptc::data {

// Images normalized to [0, 1], stored sample-major then channel, row, column.
struct Dataset {
  std::size_t channels = 1, height = 0, width = 0;
  std::size_t classes = 0;
  std::vector<double> images;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t sample_size() const noexcept { return channels * height * width; }
  std::span<const double> image(std::size_t i) const {
    return {images.data() + i * sample_size(), sample_size()};
  }

  Dataset subset(std::size_t first, std::size_t count) const;
  // Deterministic permutation from a seed.
  Dataset shuffled(std::uint64_t seed) const;
  void validate() const;
};

}  // namespace cirptc::data
