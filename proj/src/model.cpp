#include "cirptc/model.hpp"

#include <algorithm>

#include "cirptc/errors.hpp"
#include "cirptc/full_range.hpp"

namespace cirptc::nn {

namespace {

CirculantWeights* weights_of(Layer& layer) {
  if (auto* l = dynamic_cast<CirculantLinear*>(&layer)) return &l->weights;
  if (auto* c = dynamic_cast<CirculantConv*>(&layer)) return &c->weights;
  return nullptr;
}

}  // namespace

void Model::add(std::unique_ptr<Layer> layer) {
  layer->id = layers_.size();
  layers_.push_back(std::move(layer));
}

Shape Model::output_shape() const {
  Shape s = input_;
  for (const auto& l : layers_) s = l->output_shape(s);
  return s;
}

void Model::check() const {
  const Shape out = output_shape();
  if (out.size() < classes_)
    throw DimensionError("model emits " + std::to_string(out.size()) + " outputs for " + std::to_string(classes_) +
                         " classes");
  std::size_t order = 0;
  for (const auto& l : layers_) {
    const auto k = l->spec().kind;
    if (k != LayerKind::circulant_linear && k != LayerKind::circulant_conv) continue;
    if (order != 0 && l->spec().order != order) throw ConfigError("circulant layers use different block orders");
    order = l->spec().order;
  }
}

std::size_t Model::order() const {
  for (const auto& l : layers_) {
    const auto k = l->spec().kind;
    if (k == LayerKind::circulant_linear || k == LayerKind::circulant_conv) return l->spec().order;
  }
  return 0;
}

Batch Model::forward(const Batch& x, ExecContext& ctx) {
  if (x.shape != input_) throw DimensionError("model input shape mismatch");
  Batch h = x;
  for (auto& l : layers_) h = l->forward(h, ctx);
  return h;
}

Batch Model::backward(const Batch& grad_logits) {
  Batch g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

std::vector<ParamView> Model::params() {
  std::vector<ParamView> all;
  for (auto& l : layers_) {
    auto p = l->params();
    for (auto& v : p) v.name = std::to_string(l->id) + "." + v.name;
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

std::vector<std::span<double>> Model::buffers() {
  std::vector<std::span<double>> all;
  for (auto& l : layers_) {
    auto b = l->buffers();
    all.insert(all.end(), b.begin(), b.end());
  }
  return all;
}

void Model::zero_grad() {
  for (auto& l : layers_) l->zero_grad();
}

void Model::init(std::uint64_t seed) {
  for (auto& l : layers_) {
    if (auto* w = weights_of(*l)) {
      std::mt19937_64 rng(sim::mix_seed(seed, l->id));
      w->init(rng, double(w->cols));
    } else if (auto* bn = dynamic_cast<BatchNorm*>(l.get())) {
      std::fill(bn->gamma.begin(), bn->gamma.end(), 1.0);
      std::fill(bn->beta.begin(), bn->beta.end(), 0.0);
      std::fill(bn->running_mean.begin(), bn->running_mean.end(), 0.0);
      std::fill(bn->running_var.begin(), bn->running_var.end(), 1.0);
    }
  }
}

Model Model::clone() const {
  Model m(input_, classes_);
  m.weight_bits = weight_bits;
  m.act_bits = act_bits;
  for (const auto& l : layers_) m.add(l->spec());
  auto& self = const_cast<Model&>(*this);
  auto src = self.params();
  auto dst = m.params();
  for (std::size_t i = 0; i < src.size(); ++i) std::copy(src[i].value.begin(), src[i].value.end(), dst[i].value.begin());
  auto sb = self.buffers();
  auto db = m.buffers();
  for (std::size_t i = 0; i < sb.size(); ++i) std::copy(sb[i].begin(), sb[i].end(), db[i].begin());
  return m;
}

Model desk_cnn(std::size_t order, std::size_t classes) {
  Model m({1, 28, 28}, classes);
  const double hidden_hi = 2.0;
  m.add({LayerKind::circulant_conv, 1, 8, 3, order, 1.0});
  m.add({LayerKind::batchnorm, 8, 8});
  m.add({LayerKind::relu});
  m.add({LayerKind::maxpool});
  m.add({LayerKind::circulant_conv, 8, 16, 3, order, hidden_hi});
  m.add({LayerKind::batchnorm, 16, 16});
  m.add({LayerKind::relu});
  m.add({LayerKind::maxpool});
  m.add({LayerKind::circulant_linear, 16 * 5 * 5, 64, 0, order, hidden_hi});
  m.add({LayerKind::relu});
  m.add({LayerKind::circulant_linear, 64, classes, 0, order, hidden_hi});
  m.check();
  return m;
}

Model make_mlp(const std::vector<std::size_t>& widths, std::size_t order, std::size_t classes, double act_hi) {
  if (widths.size() < 2) throw ConfigError("make_mlp needs at least input and output widths");
  Model m({widths.front(), 1, 1}, classes);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    if (i > 0) m.add({LayerKind::relu});
    m.add({LayerKind::circulant_linear, widths[i], widths[i + 1], 0, order, act_hi});
  }
  m.check();
  return m;
}

ParamReport param_report(Model& model) {
  ParamReport r;
  for (std::size_t i = 0; i < model.size(); ++i) {
    Layer& l = model.layer(i);
    if (auto* w = weights_of(l)) {
      TensorCount t;
      t.name = (l.spec().kind == LayerKind::circulant_conv ? "conv" : "linear") + std::to_string(l.id);
      t.rows = w->rows;
      t.cols = w->cols;
      t.padded_rows = w->padded_rows();
      t.padded_cols = w->padded_cols();
      t.stored = w->w.stored_scalars();
      r.stored_weights += t.stored;
      r.padded_dense_weights += t.padded_rows * t.padded_cols;
      r.logical_dense_weights += t.rows * t.cols;
      r.other_params += w->bias.size();
      r.tensors.push_back(t);
    } else {
      for (auto& p : l.params()) r.other_params += p.value.size();
    }
  }
  return r;
}

}  // namespace cirptc::nn
