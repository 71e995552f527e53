#include "cirptc/train.hpp"

#include <cmath>
#include <sstream>

#include "cirptc/errors.hpp"
#include "cirptc/full_range.hpp"

namespace cirptc::nn {

void TrainConfig::validate() const {
  if (mode == ExecMode::lookup) throw ConfigError("training runs in digital or dpe mode");
  if (epochs == 0 || batch_size == 0) throw ConfigError("epochs and batch size must be positive");
  if (!(learning_rate > 0.0) || !(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("learning rate must be positive and momentum in [0, 1)");
  if (!(noise_sigma_rel >= 0.0)) throw ConfigError("noise sigma must be nonnegative");
  if (!gamma.empty() && gamma.rows() != gamma.cols()) throw DimensionError("crosstalk operator must be square");
}

Batch make_batch(const data::Dataset& data, std::size_t first, std::size_t count) {
  Batch b(count, {data.channels, data.height, data.width});
  const std::size_t s = data.sample_size();
  std::copy_n(data.images.begin() + long(first * s), count * s, b.data.begin());
  return b;
}

namespace {

ExecContext context_for(const Model& model, ExecMode mode, bool quantize, const DenseMatrix& gamma,
                        double sigma, DenseMatrix& identity) {
  ExecContext ctx;
  ctx.mode = mode;
  ctx.quantize = quantize;
  ctx.weight_bits = model.weight_bits;
  ctx.act_bits = model.act_bits;
  if (mode == ExecMode::dpe) {
    if (gamma.empty()) {
      identity = DenseMatrix::identity(std::max<std::size_t>(model.order(), 1));
      ctx.gamma = &identity;
    } else {
      ctx.gamma = &gamma;
    }
    ctx.noise_sigma_rel = sigma;
  }
  return ctx;
}

void check_fit(const Model& model, const data::Dataset& data) {
  data.validate();
  model.check();
  if (data.channels != model.input_shape().c || data.height != model.input_shape().h ||
      data.width != model.input_shape().w)
    throw DimensionError("dataset samples do not match the model input shape");
  if (data.classes > model.classes()) throw DimensionError("dataset has more classes than the model head");
}

}  // namespace

TrainHistory train(Model& model, const data::Dataset& data, const TrainConfig& cfg,
                   const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  check_fit(model, data);

  DenseMatrix identity;
  ExecContext ctx = context_for(model, cfg.mode, cfg.quantize, cfg.gamma, cfg.noise_sigma_rel, identity);
  ctx.training = true;
  std::mt19937_64 noise_rng(sim::mix_seed(cfg.seed, 0x6e6f697365));
  ctx.rng = &noise_rng;

  auto params = model.params();
  std::vector<std::vector<double>> velocity;
  for (const auto& p : params) velocity.emplace_back(p.value.size(), 0.0);

  TrainHistory history;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const data::Dataset epoch_data = data.shuffled(sim::mix_seed(cfg.seed, e + 1));
    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0;
    for (std::size_t first = 0; first < epoch_data.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, epoch_data.size() - first);
      const Batch x = make_batch(epoch_data, first, count);
      const std::span<const int> labels(epoch_data.labels.data() + first, count);
      model.zero_grad();
      const Batch logits = model.forward(x, ctx);
      const LossResult res = softmax_cross_entropy(logits, labels, model.classes());
      if (!std::isfinite(res.loss)) {
        std::ostringstream os;
        os << "non-finite training loss at epoch " << e << ", batch starting at sample " << first
           << "; learning rate " << cfg.learning_rate;
        throw NumericalError(os.str());
      }
      model.backward(res.grad);
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto& v = velocity[i];
        for (std::size_t k = 0; k < v.size(); ++k) {
          v[k] = cfg.momentum * v[k] + params[i].grad[k];
          params[i].value[k] -= cfg.learning_rate * v[k];
        }
      }
      loss_sum += res.loss;
      ++batches;
      for (std::size_t i = 0; i < count; ++i) correct += res.predictions[i] == labels[i];
    }
    EpochStats s{e, loss_sum / double(batches), double(correct) / double(epoch_data.size())};
    history.epochs.push_back(s);
    if (on_epoch) on_epoch(s);
  }
  return history;
}

InferResult infer(Model& model, const data::Dataset& data, const InferConfig& cfg) {
  check_fit(model, data);
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  if (cfg.mode == ExecMode::lookup && cfg.backend == nullptr) throw ConfigError("lookup inference needs a backend");
  DenseMatrix identity;
  ExecContext ctx = context_for(model, cfg.mode, cfg.quantize, cfg.gamma, cfg.noise_sigma_rel, identity);
  ctx.backend = cfg.backend;
  ctx.seed = cfg.seed;
  std::mt19937_64 noise_rng(sim::mix_seed(cfg.seed, 0x6e6f697365));
  ctx.rng = &noise_rng;

  InferResult r;
  r.confusion = ConfusionMatrix(model.classes());
  for (std::size_t first = 0; first < data.size(); first += cfg.batch_size) {
    const std::size_t count = std::min(cfg.batch_size, data.size() - first);
    ctx.sample_offset = first;
    const Batch logits = model.forward(make_batch(data, first, count), ctx);
    const auto p = argmax_predictions(logits, model.classes());
    r.predictions.insert(r.predictions.end(), p.begin(), p.end());
  }
  r.confusion.add(data.labels, r.predictions);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += r.predictions[i] == data.labels[i];
  r.accuracy = data.size() ? double(correct) / double(data.size()) : 0.0;
  return r;
}

}  // namespace cirptc::nn
