#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cirptc::nn {

// counts[truth][prediction].
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0);
  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts);

  void add(int truth, int prediction);
  void add(std::span<const int> truth, std::span<const int> predictions);
  std::size_t classes() const noexcept { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t prediction) const { return counts_[truth * n_ + prediction]; }
  std::uint64_t total() const;
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> counts_;
};

// Undefined ratios (empty denominators) are nullopt rather than NaN.
struct ClassMetrics {
  std::optional<double> accuracy, sensitivity, specificity;
};

ClassMetrics classify_metrics(const ConfusionMatrix& cm, std::size_t positive_class);

}  // namespace cirptc::nn
