#pragma once

// Layers of a structure-compressed network. Convolution and fully connected
// layers hold block-circulant weights (only primary vectors are parameters);
// pooling, batch normalization and activations run in full precision.
// Backward passes are derived by hand for this closed layer set.

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/linalg.hpp"
#include "cirptc/quant.hpp"

namespace cirptc::nn {

struct Shape {
  std::size_t c = 1, h = 1, w = 1;
  std::size_t size() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
};

struct Batch {
  std::size_t n = 0;
  Shape shape;
  std::vector<double> data;

  Batch() = default;
  Batch(std::size_t n_, Shape s) : n(n_), shape(s), data(n_ * s.size(), 0.0) {}
  std::span<double> sample(std::size_t i) { return {data.data() + i * shape.size(), shape.size()}; }
  std::span<const double> sample(std::size_t i) const { return {data.data() + i * shape.size(), shape.size()}; }
};

struct ParamView {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
};

enum class ExecMode { digital, dpe, lookup };

// Executes circulant MVMs outside the digital path (lookup-mode inference).
class MvmBackend {
 public:
  virtual ~MvmBackend() = default;
  // x holds quantized activations in [0, x_scale]; w is the full-precision
  // layer weight (the backend applies the same signed quantization).
  virtual RealVector apply(std::size_t layer_id, const circulant::BlockCirculantMatrix& w,
                           std::span<const double> x, double x_scale, std::uint64_t seed) = 0;
};

struct ExecContext {
  ExecMode mode = ExecMode::digital;
  bool training = false;
  bool quantize = true;
  int weight_bits = 6;
  int act_bits = 4;
  // Per-tile crosstalk operator (l x l) for the dpe mode.
  const DenseMatrix* gamma = nullptr;
  // Output deviation injected in dpe mode, relative to one tile pass full scale.
  double noise_sigma_rel = 0.0;
  std::mt19937_64* rng = nullptr;
  MvmBackend* backend = nullptr;
  std::uint64_t seed = 0;
  std::size_t sample_offset = 0;  // index of the batch's first sample in the dataset
};

enum class LayerKind : std::uint32_t {
  circulant_linear = 1,
  circulant_conv = 2,
  relu = 3,
  maxpool = 4,
  avgpool = 5,
  batchnorm = 6,
};

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in = 0, out = 0;  // linear features or conv channels
  std::size_t k = 0;            // conv window
  std::size_t order = 1;        // block order l
  double act_hi = 1.0;          // activation quantization range [0, act_hi]
  bool operator==(const LayerSpec&) const = default;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual const LayerSpec& spec() const = 0;
  virtual Shape output_shape(Shape in) const = 0;
  virtual Batch forward(const Batch& x, ExecContext& ctx) = 0;
  // Consumes the cache left by the last training forward.
  virtual Batch backward(const Batch& grad_out) = 0;
  virtual std::vector<ParamView> params() { return {}; }
  // Non-trainable state (batch-norm running statistics).
  virtual std::vector<std::span<double>> buffers() { return {}; }
  void zero_grad();

  std::size_t id = 0;
};

// Shared by the linear and convolution layers.
class CirculantWeights {
 public:
  CirculantWeights(std::size_t rows, std::size_t cols, std::size_t order);

  circulant::BlockCirculantMatrix w;
  std::vector<double> w_grad;
  std::vector<double> bias, bias_grad;
  std::size_t rows = 0, cols = 0;  // logical (unpadded) dimensions

  std::size_t padded_rows() const { return w.rows(); }
  std::size_t padded_cols() const { return w.cols(); }
  // Expanded weight after the symmetric weight quantizer (or as is).
  DenseMatrix effective(const ExecContext& ctx) const;
  // Dense weight gradient summed along circulant diagonals into w_grad.
  void accumulate_dense_grad(const DenseMatrix& dense_grad);
  std::vector<ParamView> views(const std::string& prefix);
  void init(std::mt19937_64& rng, double fan_in);
};

class CirculantLinear : public Layer {
 public:
  CirculantLinear(std::size_t in, std::size_t out, std::size_t order, double act_hi);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(Shape in) const override;
  Batch forward(const Batch& x, ExecContext& ctx) override;
  Batch backward(const Batch& grad_out) override;
  std::vector<ParamView> params() override { return weights.views("linear"); }

  CirculantWeights weights;

 private:
  LayerSpec spec_;
  Shape in_shape_;
  DenseMatrix cached_x_;   // n x padded_cols (after quantization and gamma)
  DenseMatrix cached_w_;   // effective dense weight
  std::vector<double> mask_;  // STE mask, n x in
  const DenseMatrix* gamma_ = nullptr;
};

class CirculantConv : public Layer {
 public:
  CirculantConv(std::size_t in_channels, std::size_t out_channels, std::size_t k, std::size_t order, double act_hi);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(Shape in) const override;
  Batch forward(const Batch& x, ExecContext& ctx) override;
  Batch backward(const Batch& grad_out) override;
  std::vector<ParamView> params() override { return weights.views("conv"); }

  CirculantWeights weights;

 private:
  LayerSpec spec_;
  Shape in_shape_;
  std::vector<DenseMatrix> cached_cols_;  // per sample, padded_cols x positions
  DenseMatrix cached_w_;
  std::vector<double> mask_;
  const DenseMatrix* gamma_ = nullptr;
};

class Relu : public Layer {
 public:
  Relu() { spec_.kind = LayerKind::relu; }
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(Shape in) const override { return in; }
  Batch forward(const Batch& x, ExecContext& ctx) override;
  Batch backward(const Batch& grad_out) override;

 private:
  LayerSpec spec_;
  std::vector<double> mask_;
};

class Pool2 : public Layer {
 public:
  explicit Pool2(bool max_pool) { spec_.kind = max_pool ? LayerKind::maxpool : LayerKind::avgpool; }
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(Shape in) const override { return {in.c, in.h / 2, in.w / 2}; }
  Batch forward(const Batch& x, ExecContext& ctx) override;
  Batch backward(const Batch& grad_out) override;

 private:
  LayerSpec spec_;
  Shape in_shape_;
  std::vector<std::size_t> argmax_;
};

// Per-channel normalization over batch and spatial positions.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(std::size_t channels);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(Shape in) const override { return in; }
  Batch forward(const Batch& x, ExecContext& ctx) override;
  Batch backward(const Batch& grad_out) override;
  std::vector<ParamView> params() override;
  std::vector<std::span<double>> buffers() override { return {running_mean, running_var}; }

  std::vector<double> gamma, beta, gamma_grad, beta_grad;
  std::vector<double> running_mean, running_var;
  double momentum = 0.1, eps = 1e-5;

 private:
  LayerSpec spec_;
  Shape shape_;
  std::size_t n_ = 0;
  std::vector<double> xhat_, inv_std_;
};

struct LossResult {
  double loss = 0.0;
  Batch grad;  // d loss / d logits
  std::vector<int> predictions;
};

// Mean softmax cross-entropy over the first `classes` logits of each sample.
LossResult softmax_cross_entropy(const Batch& logits, std::span<const int> labels, std::size_t classes);
std::vector<int> argmax_predictions(const Batch& logits, std::size_t classes);

std::unique_ptr<Layer> make_layer(const LayerSpec& spec);

}  // namespace cirptc::nn
