#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "cirptc/circulant.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/layers.hpp"
#include "cirptc/model.hpp"
#include "support/gradcheck.hpp"
#include "support/random.hpp"

using namespace cirptc;
using namespace cirptc::nn;
using testing_support::Gen;
using testing_support::check_layer;
using testing_support::random_batch;

namespace {

ExecContext unquantized() {
  ExecContext ctx;
  ctx.quantize = false;
  return ctx;
}

}  // namespace

TEST_CASE("circulant linear gradients match finite differences") {
  Gen g(1);
  for (std::size_t order : {1, 2, 4}) {
    CirculantLinear layer(10, 7, order, 1.0);
    std::mt19937_64 rng(3);
    layer.weights.init(rng, 10);
    for (auto& b : layer.weights.bias) b = g.uniform();
    const auto r = check_layer(layer, random_batch(g, 3, {10, 1, 1}), unquantized(), 5 + order);
    CHECK(r.worst_param < 1e-5);
    CHECK(r.input < 1e-5);
  }
}

TEST_CASE("circulant linear gradients hold with a crosstalk operator") {
  Gen g(2);
  DenseMatrix gamma(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) gamma(i, j) = (i == j ? 1.0 : 0.0) + 0.1 * g.uniform();
  ExecContext ctx = unquantized();
  ctx.mode = ExecMode::dpe;
  ctx.gamma = &gamma;
  CirculantLinear layer(8, 8, 4, 1.0);
  std::mt19937_64 rng(4);
  layer.weights.init(rng, 8);
  const auto r = check_layer(layer, random_batch(g, 2, {8, 1, 1}), ctx, 9);
  CHECK(r.worst_param < 1e-5);
  CHECK(r.input < 1e-5);
}

TEST_CASE("circulant convolution gradients match finite differences") {
  Gen g(3);
  for (std::size_t order : {1, 4}) {
    CirculantConv layer(2, 4, 3, order, 1.0);
    std::mt19937_64 rng(5);
    layer.weights.init(rng, 18);
    for (auto& b : layer.weights.bias) b = g.uniform();
    const auto r = check_layer(layer, random_batch(g, 2, {2, 6, 5}), unquantized(), 13);
    CHECK(r.worst_param < 1e-5);
    CHECK(r.input < 1e-5);
  }
}

TEST_CASE("convolution gradients with a crosstalk operator") {
  Gen g(4);
  DenseMatrix gamma(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) gamma(i, j) = (i == j ? 1.0 : 0.0) + 0.1 * g.uniform();
  ExecContext ctx = unquantized();
  ctx.mode = ExecMode::dpe;
  ctx.gamma = &gamma;
  CirculantConv layer(1, 4, 3, 4, 1.0);
  std::mt19937_64 rng(6);
  layer.weights.init(rng, 9);
  const auto r = check_layer(layer, random_batch(g, 2, {1, 5, 5}), ctx, 17);
  CHECK(r.worst_param < 1e-5);
  CHECK(r.input < 1e-5);
}

TEST_CASE("relu, pooling and batch norm gradients match finite differences") {
  Gen g(5);
  Relu relu;
  CHECK(check_layer(relu, random_batch(g, 2, {3, 4, 4}), unquantized(), 21).input < 1e-5);
  Pool2 maxp(true), avgp(false);
  CHECK(check_layer(maxp, random_batch(g, 2, {3, 4, 6}), unquantized(), 22).input < 1e-5);
  CHECK(check_layer(avgp, random_batch(g, 2, {3, 4, 6}), unquantized(), 23).input < 1e-5);
  BatchNorm bn(3);
  bn.gamma = {1.5, 0.7, -0.4};
  bn.beta = {0.1, -0.2, 0.3};
  const auto r = check_layer(bn, random_batch(g, 3, {3, 2, 2}), unquantized(), 24);
  CHECK(r.worst_param < 1e-5);
  CHECK(r.input < 1e-5);
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  Gen g(6);
  Batch z = random_batch(g, 4, {6, 1, 1}, -2.0, 2.0);
  const std::vector<int> labels{0, 3, 4, 1};
  const auto res = softmax_cross_entropy(z, labels, 5);
  const double h = 1e-4;
  std::vector<double> fd(z.data.size());
  for (std::size_t i = 0; i < z.data.size(); ++i) {
    const double keep = z.data[i];
    z.data[i] = keep + h;
    const double up = softmax_cross_entropy(z, labels, 5).loss;
    z.data[i] = keep - h;
    const double down = softmax_cross_entropy(z, labels, 5).loss;
    z.data[i] = keep;
    fd[i] = (up - down) / (2 * h);
  }
  CHECK(testing_support::rel_err(res.grad.data, fd) < 1e-5);
  // The unused sixth logit gets no gradient.
  for (std::size_t i = 0; i < 4; ++i) CHECK(res.grad.sample(i)[5] == 0.0);
}

TEST_CASE("circulant gradient equals the dense gradient summed along diagonals") {
  Gen g(7);
  const std::size_t in = 12, out = 8, l = 4, n = 5;
  CirculantLinear layer(in, out, l, 1.0);
  std::mt19937_64 rng(8);
  layer.weights.init(rng, in);
  ExecContext ctx = unquantized();
  ctx.training = true;
  const Batch x = random_batch(g, n, {in, 1, 1});
  layer.forward(x, ctx);
  Batch dy = random_batch(g, n, {out, 1, 1});
  layer.zero_grad();
  layer.backward(dy);

  // Dense oracle: G = dY^T X, then every entry (r, c) of block (bi, bj) adds to
  // primary index (c - r) mod l.
  std::vector<double> expected(layer.weights.w.stored_scalars(), 0.0);
  for (std::size_t r = 0; r < out; ++r)
    for (std::size_t c = 0; c < in; ++c) {
      double gd = 0.0;
      for (std::size_t s = 0; s < n; ++s) gd += dy.data[s * out + r] * x.data[s * in + c];
      const std::size_t bi = r / l, bj = c / l;
      expected[(bi * (in / l) + bj) * l + (c % l + l - r % l) % l] += gd;
    }
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(layer.weights.w_grad[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  Gen g(8);
  CirculantConv layer(2, 4, 3, 4, 1.0);
  std::mt19937_64 rng(9);
  layer.weights.init(rng, 18);
  ExecContext ctx;
  ctx.training = true;
  const Batch x = random_batch(g, 2, {2, 5, 5}, 0.0, 1.0);
  const Batch y = layer.forward(x, ctx);
  layer.zero_grad();
  const Batch dx = layer.backward(Batch(y.n, y.shape));
  for (auto& p : layer.params())
    for (double v : p.grad) CHECK(v == 0.0);
  for (double v : dx.data) CHECK(v == 0.0);
}

TEST_CASE("backward without a training forward is an error") {
  CirculantLinear layer(4, 4, 4, 1.0);
  CHECK_THROWS_AS(layer.backward(Batch(1, {4, 1, 1})), ConfigError);
}

TEST_CASE("quantized forward equals the direct product of quantized operands") {
  Gen g(9);
  CirculantLinear layer(8, 8, 4, 2.0);
  std::mt19937_64 rng(10);
  layer.weights.init(rng, 8);
  ExecContext ctx;
  const Batch x = random_batch(g, 1, {8, 1, 1}, 0.0, 2.5);
  const Batch y = layer.forward(x, ctx);
  const auto wq = quant::symmetric_spec(layer.weights.w.parameters(), 6);
  circulant::BlockCirculantMatrix q = layer.weights.w;
  for (auto& v : q.parameters()) v = quant::quantize(v, wq);
  const RealVector xq = quant::quantize(x.data, quant::QuantSpec{4, 0.0, 2.0});
  const RealVector ref = circulant::bcm_matvec_direct(q, xq);
  for (std::size_t i = 0; i < 8; ++i) CHECK(y.data[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("parameter accounting of the desk CNN") {
  Model base = desk_cnn(1);
  Model strc = desk_cnn(4);
  const auto rb = param_report(base);
  const auto rs = param_report(strc);
  CHECK(rb.stored_weights == rb.logical_dense_weights);
  REQUIRE(rs.tensors.size() == 4);
  for (const auto& t : rs.tensors) {
    CHECK(t.stored * 4 == t.padded_rows * t.padded_cols);
    CHECK(t.stored * 4 == t.padded_rows * t.padded_cols / 4 * 4);
  }
  CHECK(rs.weight_reduction_padded() == 0.75);
  CHECK(rs.logical_dense_weights == rb.stored_weights);
  CHECK(rs.weight_reduction_logical() < 0.75);
}

TEST_CASE("model chain rejects inconsistent shapes") {
  Model m({10, 1, 1}, 3);
  m.add({LayerKind::circulant_linear, 12, 4, 0, 4, 1.0});
  CHECK_THROWS_AS(m.check(), DimensionError);
}
