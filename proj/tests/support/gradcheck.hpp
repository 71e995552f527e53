#pragma once

#include <algorithm>
#include <vector>

#include "cirptc/layers.hpp"
#include "support/random.hpp"

namespace testing_support {

using cirptc::nn::Batch;
using cirptc::nn::ExecContext;
using cirptc::nn::Layer;
using cirptc::nn::Shape;

inline Batch random_batch(Gen& g, std::size_t n, Shape s, double lo = -1.0, double hi = 1.0) {
  Batch b(n, s);
  b.data = g.vec(b.data.size(), lo, hi);
  return b;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct GradCheck {
  double worst_param = 0.0;
  double input = 0.0;
};

// Loss = <R, layer(x)> with a fixed random R; compares analytic gradients of
// every parameter tensor and of the input with central differences.
inline GradCheck check_layer(Layer& layer, Batch x, ExecContext ctx, std::uint64_t seed) {
  Gen g(seed);
  ctx.training = true;
  const Batch y0 = layer.forward(x, ctx);
  Batch r(y0.n, y0.shape);
  r.data = g.vec(r.data.size());
  auto loss = [&](const Batch& in) { return dot(r.data, layer.forward(in, ctx).data); };

  layer.zero_grad();
  layer.forward(x, ctx);
  const Batch dx = layer.backward(r);
  const double h = 1e-4;
  GradCheck out;
  for (auto& p : layer.params()) {
    std::vector<double> fd(p.value.size());
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double keep = p.value[i];
      p.value[i] = keep + h;
      const double up = loss(x);
      p.value[i] = keep - h;
      const double down = loss(x);
      p.value[i] = keep;
      fd[i] = (up - down) / (2 * h);
    }
    const std::vector<double> an(p.grad.begin(), p.grad.end());
    out.worst_param = std::max(out.worst_param, testing_support::rel_err(an, fd));
  }
  std::vector<double> fdx(x.data.size());
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double keep = x.data[i];
    x.data[i] = keep + h;
    const double up = loss(x);
    x.data[i] = keep - h;
    const double down = loss(x);
    x.data[i] = keep;
    fdx[i] = (up - down) / (2 * h);
  }
  out.input = testing_support::rel_err(dx.data, fdx);
  return out;
}

}  // namespace testing_support
