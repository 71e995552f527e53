#include "cirptc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cirptc/errors.hpp"

namespace cirptc::data {

Dataset Dataset::subset(std::size_t first, std::size_t count) const {
  if (first > size() || count > size() - first)
    throw DimensionError("subset [" + std::to_string(first) + ", " + std::to_string(first + count) +
                         ") exceeds dataset of " + std::to_string(size()));
  Dataset d = *this;
  d.images.assign(images.begin() + long(first * sample_size()), images.begin() + long((first + count) * sample_size()));
  d.labels.assign(labels.begin() + long(first), labels.begin() + long(first + count));
  return d;
}

Dataset Dataset::shuffled(std::uint64_t seed) const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  Dataset d = *this;
  const std::size_t s = sample_size();
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::copy_n(images.begin() + long(order[i] * s), s, d.images.begin() + long(i * s));
    d.labels[i] = labels[order[i]];
  }
  return d;
}

void Dataset::validate() const {
  if (sample_size() == 0) throw DimensionError("dataset has empty samples");
  if (images.size() != labels.size() * sample_size())
    throw DimensionError("dataset holds " + std::to_string(images.size()) + " values for " +
                         std::to_string(labels.size()) + " samples of " + std::to_string(sample_size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || std::size_t(labels[i]) >= classes)
      throw FormatError(FormatError::Kind::label_out_of_range,
                        "label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                            " outside [0, " + std::to_string(classes) + ")");
  for (double v : images)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("pixel value outside [0, 1]");
}

}  // namespace cirptc::data
