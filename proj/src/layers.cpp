#include "cirptc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cirptc/conv_lowering.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/full_range.hpp"

namespace cirptc::nn {

void Layer::zero_grad() {
  for (auto& p : params()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Quantizes activations onto [0, act_hi] and records the straight-through mask.
void quantize_activations(std::span<const double> x, std::span<double> xq, std::span<double> mask,
                          const ExecContext& ctx, double act_hi) {
  if (!ctx.quantize) {
    std::copy(x.begin(), x.end(), xq.begin());
    std::fill(mask.begin(), mask.end(), 1.0);
    return;
  }
  const quant::QuantSpec spec{ctx.act_bits, 0.0, act_hi};
  for (std::size_t i = 0; i < x.size(); ++i) {
    xq[i] = quant::quantize(x[i], spec);
    mask[i] = quant::ste_grad(x[i], spec);
  }
}

// In place: every length-l segment v_j <- G v_j (or G^T v_j).
void apply_gamma(std::span<double> v, const DenseMatrix& g, bool transpose) {
  const std::size_t l = g.rows();
  std::vector<double> tmp(l);
  for (std::size_t s = 0; s + l <= v.size(); s += l) {
    for (std::size_t i = 0; i < l; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < l; ++j) acc += (transpose ? g(j, i) : g(i, j)) * v[s + j];
      tmp[i] = acc;
    }
    std::copy(tmp.begin(), tmp.end(), v.begin() + long(s));
  }
}

const DenseMatrix* active_gamma(const ExecContext& ctx, std::size_t order) {
  if (ctx.mode != ExecMode::dpe || ctx.gamma == nullptr) return nullptr;
  if (ctx.gamma->rows() != order || ctx.gamma->cols() != order)
    throw DimensionError("crosstalk operator is " + std::to_string(ctx.gamma->rows()) + "x" +
                         std::to_string(ctx.gamma->cols()) + ", layer block order is " + std::to_string(order));
  return ctx.gamma;
}

// Standard deviation of the injected output deviation: each output sums
// 2 * Q tile passes (signed weights take two passes), each with
// sigma_rel * l full-scale deviation in normalized units.
double injected_sigma(const ExecContext& ctx, const CirculantWeights& cw, double act_hi) {
  if (ctx.mode != ExecMode::dpe || ctx.noise_sigma_rel <= 0.0 || ctx.rng == nullptr) return 0.0;
  const quant::QuantSpec spec = quant::symmetric_spec(cw.w.parameters(), ctx.weight_bits);
  const double l = double(cw.w.order());
  return ctx.noise_sigma_rel * l * spec.hi * act_hi * std::sqrt(2.0 * double(cw.w.block_cols()));
}

}  // namespace

CirculantWeights::CirculantWeights(std::size_t rows_, std::size_t cols_, std::size_t order)
    : w(ceil_div(rows_, order), ceil_div(cols_, order), order),
      w_grad(w.stored_scalars(), 0.0),
      bias(rows_, 0.0),
      bias_grad(rows_, 0.0),
      rows(rows_),
      cols(cols_) {}

DenseMatrix CirculantWeights::effective(const ExecContext& ctx) const {
  if (!ctx.quantize) return circulant::bcm_expand(w);
  const quant::QuantSpec spec = quant::symmetric_spec(w.parameters(), ctx.weight_bits);
  circulant::BlockCirculantMatrix q = w;
  for (auto& v : q.parameters()) v = quant::quantize(v, spec);
  return circulant::bcm_expand(q);
}

void CirculantWeights::accumulate_dense_grad(const DenseMatrix& g) {
  const std::size_t l = w.order(), p = w.block_rows(), q = w.block_cols();
  for (std::size_t bi = 0; bi < p; ++bi)
    for (std::size_t bj = 0; bj < q; ++bj) {
      double* dst = w_grad.data() + (bi * q + bj) * l;
      for (std::size_t r = 0; r < l; ++r) {
        const double* row = g.row(bi * l + r).data() + bj * l;
        for (std::size_t c = 0; c < l; ++c) dst[(c + l - r) % l] += row[c];
      }
    }
}

std::vector<ParamView> CirculantWeights::views(const std::string& prefix) {
  return {{prefix + ".primary", w.parameters(), w_grad}, {prefix + ".bias", bias, bias_grad}};
}

void CirculantWeights::init(std::mt19937_64& rng, double fan_in) {
  const double bound = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& v : w.parameters()) v = u(rng);
  std::fill(bias.begin(), bias.end(), 0.0);
}

CirculantLinear::CirculantLinear(std::size_t in, std::size_t out, std::size_t order, double act_hi)
    : weights(out, in, order) {
  spec_ = {LayerKind::circulant_linear, in, out, 0, order, act_hi};
}

Shape CirculantLinear::output_shape(Shape in) const {
  if (in.size() != spec_.in)
    throw DimensionError("linear layer expects " + std::to_string(spec_.in) + " features, got " +
                         std::to_string(in.size()));
  return {spec_.out, 1, 1};
}

Batch CirculantLinear::forward(const Batch& x, ExecContext& ctx) {
  output_shape(x.shape);
  in_shape_ = x.shape;
  const std::size_t n = x.n, in = spec_.in, out = spec_.out;
  const std::size_t qp = weights.padded_cols(), pp = weights.padded_rows();
  DenseMatrix xp(n, qp);
  std::vector<double> xq(n * in), mask(n * in);
  quantize_activations(x.data, xq, mask, ctx, spec_.act_hi);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(xq.data() + i * in, in, xp.row(i).data());
  gamma_ = active_gamma(ctx, spec_.order);
  if (gamma_)
    for (std::size_t i = 0; i < n; ++i) apply_gamma(xp.row(i), *gamma_, false);

  Batch y(n, {out, 1, 1});
  if (ctx.mode == ExecMode::lookup) {
    if (ctx.backend == nullptr) throw ConfigError("lookup mode needs an MVM backend");
    for (std::size_t i = 0; i < n; ++i) {
      const RealVector r = ctx.backend->apply(id, weights.w, xp.row(i), spec_.act_hi,
                                              sim::mix_seed(ctx.seed, id, ctx.sample_offset + i));
      for (std::size_t o = 0; o < out; ++o) y.data[i * out + o] = r[o] + weights.bias[o];
    }
    return y;
  }
  const DenseMatrix d = weights.effective(ctx);
  const DenseMatrix prod = matmul_nt(xp, d);  // n x pp
  const double sigma = injected_sigma(ctx, weights, spec_.act_hi);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out; ++o) {
      double v = prod(i, o) + weights.bias[o];
      if (sigma > 0.0) v += sigma * normal(*ctx.rng);
      y.data[i * out + o] = v;
    }
  (void)pp;
  if (ctx.training) {
    cached_x_ = std::move(xp);
    cached_w_ = d;
    mask_ = std::move(mask);
  }
  return y;
}

Batch CirculantLinear::backward(const Batch& grad_out) {
  if (cached_w_.empty()) throw ConfigError("linear backward called without a training forward");
  const std::size_t n = grad_out.n, in = spec_.in, out = spec_.out;
  const std::size_t pp = weights.padded_rows(), qp = weights.padded_cols();
  DenseMatrix dyt(pp, n);  // padded rows stay zero
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out; ++o) {
      const double g = grad_out.data[i * out + o];
      dyt(o, i) = g;
      weights.bias_grad[o] += g;
    }
  weights.accumulate_dense_grad(matmul(dyt, cached_x_));
  const DenseMatrix dxp = matmul(dyt.transposed(), cached_w_);  // n x qp
  Batch dx(n, in_shape_);
  std::vector<double> row(qp);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(dxp.row(i).data(), qp, row.data());
    if (gamma_) apply_gamma(row, *gamma_, true);
    for (std::size_t j = 0; j < in; ++j) dx.data[i * in + j] = row[j] * mask_[i * in + j];
  }
  return dx;
}

CirculantConv::CirculantConv(std::size_t in_channels, std::size_t out_channels, std::size_t k, std::size_t order,
                             double act_hi)
    : weights(out_channels, k * k * in_channels, order) {
  spec_ = {LayerKind::circulant_conv, in_channels, out_channels, k, order, act_hi};
}

Shape CirculantConv::output_shape(Shape in) const {
  if (in.c != spec_.in || in.h < spec_.k || in.w < spec_.k)
    throw DimensionError("conv layer expects " + std::to_string(spec_.in) + " channels of at least " +
                         std::to_string(spec_.k) + "x" + std::to_string(spec_.k));
  return {spec_.out, in.h - spec_.k + 1, in.w - spec_.k + 1};
}

Batch CirculantConv::forward(const Batch& x, ExecContext& ctx) {
  const Shape os = output_shape(x.shape);
  in_shape_ = x.shape;
  const std::size_t n = x.n, k = spec_.k, cout = spec_.out, positions = os.h * os.w;
  const std::size_t kp = k * k * spec_.in, qp = weights.padded_cols();
  gamma_ = active_gamma(ctx, spec_.order);
  std::vector<double> xq(x.data.size()), mask(x.data.size());
  quantize_activations(x.data, xq, mask, ctx, spec_.act_hi);

  DenseMatrix d;
  if (ctx.mode != ExecMode::lookup) d = weights.effective(ctx);
  else if (ctx.backend == nullptr) throw ConfigError("lookup mode needs an MVM backend");
  const double sigma = injected_sigma(ctx, weights, spec_.act_hi);
  std::normal_distribution<double> normal(0.0, 1.0);

  Batch y(n, os);
  if (ctx.training) cached_cols_.assign(n, DenseMatrix());
  for (std::size_t i = 0; i < n; ++i) {
    conv::ImageTensor img(x.shape.c, x.shape.h, x.shape.w,
                          std::vector<double>(xq.begin() + long(i * x.shape.size()),
                                              xq.begin() + long((i + 1) * x.shape.size())));
    const DenseMatrix raw = conv::im2col(img, k);
    DenseMatrix cols(qp, positions);
    std::copy(raw.data().begin(), raw.data().end(), cols.data().begin());
    if (gamma_) {
      std::vector<double> col(qp);
      for (std::size_t p = 0; p < positions; ++p) {
        for (std::size_t r = 0; r < qp; ++r) col[r] = cols(r, p);
        apply_gamma(col, *gamma_, false);
        for (std::size_t r = 0; r < qp; ++r) cols(r, p) = col[r];
      }
    }
    auto out = y.sample(i);
    if (ctx.mode == ExecMode::lookup) {
      std::vector<double> col(qp);
      for (std::size_t p = 0; p < positions; ++p) {
        for (std::size_t r = 0; r < qp; ++r) col[r] = cols(r, p);
        const RealVector r = ctx.backend->apply(id, weights.w, col, spec_.act_hi,
                                                sim::mix_seed(ctx.seed, id, (ctx.sample_offset + i) * positions + p));
        for (std::size_t o = 0; o < cout; ++o) out[o * positions + p] = r[o] + weights.bias[o];
      }
    } else {
      const DenseMatrix prod = matmul(d, cols);  // pp x positions
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t p = 0; p < positions; ++p) {
          double v = prod(o, p) + weights.bias[o];
          if (sigma > 0.0) v += sigma * normal(*ctx.rng);
          out[o * positions + p] = v;
        }
    }
    if (ctx.training) cached_cols_[i] = std::move(cols);
  }
  (void)kp;
  if (ctx.training) {
    cached_w_ = std::move(d);
    mask_ = std::move(mask);
  }
  return y;
}

Batch CirculantConv::backward(const Batch& grad_out) {
  if (cached_w_.empty()) throw ConfigError("conv backward called without a training forward");
  const std::size_t n = grad_out.n, k = spec_.k, cin = spec_.in, cout = spec_.out;
  const Shape os = grad_out.shape;
  const std::size_t positions = os.h * os.w, pp = weights.padded_rows(), qp = weights.padded_cols();
  const DenseMatrix wt = cached_w_.transposed();
  DenseMatrix gsum(pp, qp);
  Batch dx(n, in_shape_);
  std::vector<double> col(qp);
  for (std::size_t i = 0; i < n; ++i) {
    DenseMatrix dy(pp, positions);
    const auto g = grad_out.sample(i);
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t p = 0; p < positions; ++p) {
        dy(o, p) = g[o * positions + p];
        weights.bias_grad[o] += g[o * positions + p];
      }
    const DenseMatrix gi = matmul_nt(dy, cached_cols_[i]);
    for (std::size_t t = 0; t < gsum.data().size(); ++t) gsum.data()[t] += gi.data()[t];
    const DenseMatrix dcols = matmul(wt, dy);  // qp x positions
    auto dxs = dx.sample(i);
    for (std::size_t p = 0; p < positions; ++p) {
      for (std::size_t r = 0; r < qp; ++r) col[r] = dcols(r, p);
      if (gamma_) apply_gamma(col, *gamma_, true);
      const std::size_t oy = p / os.w, ox = p % os.w;
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t r = 0; r < k; ++r)
          for (std::size_t s = 0; s < k; ++s)
            dxs[(c * in_shape_.h + oy + r) * in_shape_.w + ox + s] +=
                col[conv::kFlattenLayout.index(c, r, s, k, cin)];
    }
  }
  weights.accumulate_dense_grad(gsum);
  for (std::size_t t = 0; t < dx.data.size(); ++t) dx.data[t] *= mask_[t];
  return dx;
}

Batch Relu::forward(const Batch& x, ExecContext& ctx) {
  Batch y = x;
  if (ctx.training) mask_.assign(x.data.size(), 0.0);
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    if (y.data[i] > 0.0) {
      if (ctx.training) mask_[i] = 1.0;
    } else {
      y.data[i] = 0.0;
    }
  }
  return y;
}

Batch Relu::backward(const Batch& grad_out) {
  if (mask_.size() != grad_out.data.size()) throw ConfigError("relu backward called without a training forward");
  Batch dx = grad_out;
  for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
  return dx;
}

Batch Pool2::forward(const Batch& x, ExecContext& ctx) {
  const Shape os = output_shape(x.shape);
  if (os.h == 0 || os.w == 0) throw DimensionError("pooling input smaller than 2x2");
  in_shape_ = x.shape;
  Batch y(x.n, os);
  const bool is_max = spec_.kind == LayerKind::maxpool;
  if (ctx.training && is_max) argmax_.assign(y.data.size(), 0);
  for (std::size_t i = 0; i < x.n; ++i) {
    const auto in = x.sample(i);
    auto out = y.sample(i);
    for (std::size_t c = 0; c < os.c; ++c)
      for (std::size_t oy = 0; oy < os.h; ++oy)
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          double best = -std::numeric_limits<double>::infinity(), sum = 0.0;
          std::size_t arg = 0;
          for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dxx = 0; dxx < 2; ++dxx) {
              const std::size_t idx = (c * x.shape.h + 2 * oy + dy) * x.shape.w + 2 * ox + dxx;
              sum += in[idx];
              if (in[idx] > best) {
                best = in[idx];
                arg = idx;
              }
            }
          const std::size_t o = (c * os.h + oy) * os.w + ox;
          out[o] = is_max ? best : 0.25 * sum;
          if (ctx.training && is_max) argmax_[i * os.size() + o] = arg;
        }
  }
  return y;
}

Batch Pool2::backward(const Batch& grad_out) {
  const Shape os = grad_out.shape;
  Batch dx(grad_out.n, in_shape_);
  const bool is_max = spec_.kind == LayerKind::maxpool;
  if (is_max && argmax_.size() != grad_out.data.size()) throw ConfigError("pool backward called without a training forward");
  for (std::size_t i = 0; i < grad_out.n; ++i) {
    const auto g = grad_out.sample(i);
    auto d = dx.sample(i);
    for (std::size_t c = 0; c < os.c; ++c)
      for (std::size_t oy = 0; oy < os.h; ++oy)
        for (std::size_t ox = 0; ox < os.w; ++ox) {
          const std::size_t o = (c * os.h + oy) * os.w + ox;
          if (is_max) {
            d[argmax_[i * os.size() + o]] += g[o];
          } else {
            for (std::size_t dy = 0; dy < 2; ++dy)
              for (std::size_t dxx = 0; dxx < 2; ++dxx)
                d[(c * in_shape_.h + 2 * oy + dy) * in_shape_.w + 2 * ox + dxx] += 0.25 * g[o];
          }
        }
  }
  return dx;
}

BatchNorm::BatchNorm(std::size_t channels)
    : gamma(channels, 1.0),
      beta(channels, 0.0),
      gamma_grad(channels, 0.0),
      beta_grad(channels, 0.0),
      running_mean(channels, 0.0),
      running_var(channels, 1.0) {
  spec_.kind = LayerKind::batchnorm;
  spec_.in = spec_.out = channels;
}

std::vector<ParamView> BatchNorm::params() {
  return {{"bn.gamma", gamma, gamma_grad}, {"bn.beta", beta, beta_grad}};
}

Batch BatchNorm::forward(const Batch& x, ExecContext& ctx) {
  const std::size_t ch = gamma.size();
  if (x.shape.c != ch) throw DimensionError("batch norm channel count mismatch");
  const std::size_t hw = x.shape.h * x.shape.w, n = x.n;
  Batch y(n, x.shape);
  if (ctx.training) {
    shape_ = x.shape;
    n_ = n;
    xhat_.assign(x.data.size(), 0.0);
    inv_std_.assign(ch, 0.0);
  }
  const double m = double(n * hw);
  for (std::size_t c = 0; c < ch; ++c) {
    double mean = running_mean[c], var = running_var[c];
    if (ctx.training) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < hw; ++p) s += x.data[(i * ch + c) * hw + p];
      mean = s / m;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < hw; ++p) v += std::pow(x.data[(i * ch + c) * hw + p] - mean, 2);
      var = v / m;
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean;
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * (m > 1.0 ? var * m / (m - 1.0) : var);
    }
    const double inv = 1.0 / std::sqrt(var + eps);
    if (ctx.training) inv_std_[c] = inv;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t idx = (i * ch + c) * hw + p;
        const double xh = (x.data[idx] - mean) * inv;
        if (ctx.training) xhat_[idx] = xh;
        y.data[idx] = gamma[c] * xh + beta[c];
      }
  }
  return y;
}

Batch BatchNorm::backward(const Batch& grad_out) {
  if (xhat_.size() != grad_out.data.size()) throw ConfigError("batch norm backward called without a training forward");
  const std::size_t ch = gamma.size(), hw = shape_.h * shape_.w, n = n_;
  const double m = double(n * hw);
  Batch dx(n, shape_);
  for (std::size_t c = 0; c < ch; ++c) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t idx = (i * ch + c) * hw + p;
        sum_dy += grad_out.data[idx];
        sum_dy_xh += grad_out.data[idx] * xhat_[idx];
      }
    gamma_grad[c] += sum_dy_xh;
    beta_grad[c] += sum_dy;
    const double k = gamma[c] * inv_std_[c] / m;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t idx = (i * ch + c) * hw + p;
        dx.data[idx] = k * (m * grad_out.data[idx] - sum_dy - xhat_[idx] * sum_dy_xh);
      }
  }
  return dx;
}

LossResult softmax_cross_entropy(const Batch& logits, std::span<const int> labels, std::size_t classes) {
  const std::size_t n = logits.n, width = logits.shape.size();
  if (labels.size() != n) throw DimensionError("softmax_cross_entropy: label count mismatch");
  if (classes == 0 || classes > width) throw DimensionError("softmax_cross_entropy: bad class count");
  LossResult r;
  r.grad = Batch(n, logits.shape);
  r.predictions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = logits.sample(i);
    if (labels[i] < 0 || std::size_t(labels[i]) >= classes) throw DomainError("label out of range");
    const double mx = *std::max_element(z.begin(), z.begin() + long(classes));
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(z[c] - mx);
    const double log_denom = std::log(denom) + mx;
    r.loss += log_denom - z[std::size_t(labels[i])];
    auto g = r.grad.sample(i);
    std::size_t best = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      g[c] = (std::exp(z[c] - log_denom) - (int(c) == labels[i] ? 1.0 : 0.0)) / double(n);
      if (z[c] > z[best]) best = c;
    }
    r.predictions[i] = int(best);
  }
  r.loss /= double(n);
  return r;
}

std::vector<int> argmax_predictions(const Batch& logits, std::size_t classes) {
  std::vector<int> p(logits.n);
  for (std::size_t i = 0; i < logits.n; ++i) {
    const auto z = logits.sample(i);
    p[i] = int(std::max_element(z.begin(), z.begin() + long(classes)) - z.begin());
  }
  return p;
}

std::unique_ptr<Layer> make_layer(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::circulant_linear:
      return std::make_unique<CirculantLinear>(s.in, s.out, s.order, s.act_hi);
    case LayerKind::circulant_conv:
      return std::make_unique<CirculantConv>(s.in, s.out, s.k, s.order, s.act_hi);
    case LayerKind::relu:
      return std::make_unique<Relu>();
    case LayerKind::maxpool:
      return std::make_unique<Pool2>(true);
    case LayerKind::avgpool:
      return std::make_unique<Pool2>(false);
    case LayerKind::batchnorm:
      return std::make_unique<BatchNorm>(s.in);
  }
  throw ConfigError("unknown layer kind");
}

}  // namespace cirptc::nn
