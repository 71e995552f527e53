#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cirptc/layers.hpp"

namespace cirptc::nn {

// Ordered chain of layers ending in a softmax cross-entropy head over the
// first `classes` outputs.
class Model {
 public:
  Model() = default;
  Model(Shape input, std::size_t classes) : input_(input), classes_(classes) {}
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  void add(std::unique_ptr<Layer> layer);
  void add(const LayerSpec& spec) { add(make_layer(spec)); }

  Shape input_shape() const noexcept { return input_; }
  Shape output_shape() const;
  std::size_t classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  Batch forward(const Batch& x, ExecContext& ctx);
  Batch backward(const Batch& grad_logits);
  std::vector<ParamView> params();
  std::vector<std::span<double>> buffers();
  void zero_grad();
  // He-uniform circulant weights, zero biases, unit BN scales.
  void init(std::uint64_t seed);
  // Deep copy (specs, parameters and buffers).
  Model clone() const;
  // Block order shared by the circulant layers (0 when there are none).
  std::size_t order() const;
  // Throws DimensionError on an inconsistent chain.
  void check() const;

  int weight_bits = 6;
  int act_bits = 4;

 private:
  Shape input_;
  std::size_t classes_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Desk-scale digit CNN on 1 x 28 x 28 inputs: two circulant convolutions with
// batch norm, ReLU and 2x2 max pooling, then two circulant FC layers.
// order = 1 gives the unstructured baseline.
Model desk_cnn(std::size_t order, std::size_t classes = 10);

// Fully connected network of circulant layers with ReLU between them.
Model make_mlp(const std::vector<std::size_t>& widths, std::size_t order, std::size_t classes, double act_hi = 1.0);

struct TensorCount {
  std::string name;
  std::size_t rows = 0, cols = 0;        // logical weight tensor
  std::size_t padded_rows = 0, padded_cols = 0;
  std::size_t stored = 0;                // primary-vector scalars
};

struct ParamReport {
  std::vector<TensorCount> tensors;
  std::size_t stored_weights = 0;
  std::size_t padded_dense_weights = 0;   // dense tensors at the block-aligned size
  std::size_t logical_dense_weights = 0;  // dense tensors at the logical size
  std::size_t other_params = 0;           // biases and batch-norm scales/shifts
  double weight_reduction_padded() const { return 1.0 - double(stored_weights) / double(padded_dense_weights); }
  double weight_reduction_logical() const { return 1.0 - double(stored_weights) / double(logical_dense_weights); }
};

ParamReport param_report(Model& model);

}  // namespace cirptc::nn
