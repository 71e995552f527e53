#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cirptc/dataset.hpp"
#include "cirptc/linalg.hpp"
#include "cirptc/metrics.hpp"
#include "cirptc/model.hpp"

namespace cirptc::nn {

struct TrainConfig {
  ExecMode mode = ExecMode::digital;  // digital or dpe
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  bool quantize = true;
  // dpe mode: per-tile crosstalk operator (identity when empty) and the
  // injected output deviation, resampled on every forward pass.
  DenseMatrix gamma;
  double noise_sigma_rel = 0.0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean over minibatches
  double accuracy = 0.0;  // on the training minibatches as seen
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

// Minibatch SGD with momentum on softmax cross-entropy. A non-finite loss
// raises NumericalError.
TrainHistory train(Model& model, const data::Dataset& data, const TrainConfig& cfg,
                   const std::function<void(const EpochStats&)>& on_epoch = {});

struct InferConfig {
  ExecMode mode = ExecMode::digital;
  bool quantize = true;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  DenseMatrix gamma;              // dpe mode
  double noise_sigma_rel = 0.0;   // dpe mode
  MvmBackend* backend = nullptr;  // lookup mode
};

struct InferResult {
  std::vector<int> predictions;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
};

InferResult infer(Model& model, const data::Dataset& data, const InferConfig& cfg);

// Assembles samples [first, first + count) into a batch of the model input shape.
Batch make_batch(const data::Dataset& data, std::size_t first, std::size_t count);

}  // namespace cirptc::nn
