#include "cirptc/metrics.hpp"

#include <numeric>

#include "cirptc/errors.hpp"

namespace cirptc::nn {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts)
    : n_(classes), counts_(std::move(counts)) {
  if (counts_.size() != n_ * n_) throw DimensionError("confusion matrix needs classes^2 counts");
}

void ConfusionMatrix::add(int truth, int prediction) {
  if (truth < 0 || prediction < 0 || std::size_t(truth) >= n_ || std::size_t(prediction) >= n_)
    throw DomainError("confusion matrix class index out of range");
  ++counts_[std::size_t(truth) * n_ + std::size_t(prediction)];
}

void ConfusionMatrix::add(std::span<const int> truth, std::span<const int> predictions) {
  if (truth.size() != predictions.size()) throw DimensionError("confusion matrix: label count mismatch");
  for (std::size_t i = 0; i < truth.size(); ++i) add(truth[i], predictions[i]);
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

ClassMetrics classify_metrics(const ConfusionMatrix& cm, std::size_t positive) {
  if (positive >= cm.classes()) throw DomainError("positive class out of range");
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return double(num) / double(den);
  };
  std::uint64_t trace = 0, tp = 0, fn = 0, fp = 0, tn = 0;
  for (std::size_t t = 0; t < cm.classes(); ++t)
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      const std::uint64_t c = cm.at(t, p);
      if (t == p) trace += c;
      if (t == positive && p == positive) tp += c;
      else if (t == positive) fn += c;
      else if (p == positive) fp += c;
      else tn += c;
    }
  return {ratio(trace, cm.total()), ratio(tp, tp + fn), ratio(tn, tn + fp)};
}

}  // namespace cirptc::nn
