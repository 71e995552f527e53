#include <doctest.h>

#include <cmath>

#include "cirptc/circulant.hpp"
#include "cirptc/dpe.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/synthetic.hpp"
#include "cirptc/train.hpp"
#include "support/random.hpp"

using namespace cirptc;
using testing_support::Gen;

namespace {

// Two well separated blobs in the unit square, padded to 4 features.
data::Dataset blobs(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  data::Dataset d;
  d.channels = 4;
  d.height = d.width = 1;
  d.classes = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = int(i % 2);
    const double cx = c ? 0.75 : 0.25, cy = c ? 0.3 : 0.7;
    d.images.push_back(std::clamp(cx + g.uniform(-0.15, 0.15), 0.0, 1.0));
    d.images.push_back(std::clamp(cy + g.uniform(-0.15, 0.15), 0.0, 1.0));
    d.images.push_back(0.0);
    d.images.push_back(0.0);
    d.labels.push_back(c);
  }
  return d;
}

nn::Model toy(std::uint64_t seed) {
  nn::Model m = nn::make_mlp({4, 16, 4}, 4, 2);
  m.init(seed);
  return m;
}

}  // namespace

TEST_CASE("separable toy problem is learned") {
  const auto tr = blobs(200, 1), te = blobs(200, 2);
  nn::Model m = toy(3);
  nn::TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 0.05;
  nn::train(m, tr, cfg);
  CHECK(nn::infer(m, te, {}).accuracy >= 0.99);
}

TEST_CASE("loss falls over training for every seed") {
  const auto tr = blobs(128, 4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    nn::Model m = toy(seed);
    nn::TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = seed;
    const auto h = nn::train(m, tr, cfg);
    REQUIRE(h.epochs.size() == 10);
    CHECK(h.epochs.back().loss < h.epochs.front().loss);
  }
}

TEST_CASE("training is deterministic and keeps the circulant structure") {
  const auto tr = data::synthetic_digits(64, 5);
  auto run = [&] {
    nn::Model m = nn::desk_cnn(4);
    m.init(9);
    nn::TrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 11;
    const auto h = nn::train(m, tr, cfg);
    return std::make_pair(std::move(m), h.epochs.back().loss);
  };
  auto [a, la] = run();
  auto [b, lb] = run();
  CHECK(la == lb);
  auto pa = a.params(), pb = b.params();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(std::equal(pa[i].value.begin(), pa[i].value.end(), pb[i].value.begin()));

  // Projecting the expanded trained weight recovers the stored primaries.
  for (std::size_t i = 0; i < a.size(); ++i)
    if (auto* conv = dynamic_cast<nn::CirculantConv*>(&a.layer(i))) {
      const auto& w = conv->weights.w;
      const auto back = circulant::bcm_project(circulant::bcm_expand(w), w.order());
      CHECK(max_abs_diff(back.parameters(), w.parameters()) < 1e-12);
    }
}

TEST_CASE("training rejects bad configurations and diverging runs") {
  const auto tr = blobs(32, 1);
  nn::Model m = toy(1);
  nn::TrainConfig cfg;
  cfg.mode = nn::ExecMode::lookup;
  CHECK_THROWS_AS(nn::train(m, tr, cfg), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(nn::train(m, tr, cfg), ConfigError);
  cfg = {};
  cfg.learning_rate = 1e300;
  cfg.quantize = false;
  CHECK_THROWS_AS(nn::train(m, tr, cfg), NumericalError);
}

TEST_CASE("lookup inference on ideal physics matches the digital path") {
  const auto tr = data::synthetic_digits(300, 1), te = data::synthetic_digits(40, 2);
  nn::Model m = nn::desk_cnn(4);
  m.init(2);
  nn::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.01;
  nn::train(m, tr, cfg);
  const auto d = nn::infer(m, te, {});
  dpe::PhysicalBackend backend(sim::prototype_tile());
  nn::InferConfig lc;
  lc.mode = nn::ExecMode::lookup;
  lc.backend = &backend;
  const auto l = nn::infer(m, te, lc);
  std::size_t same = 0;
  for (std::size_t i = 0; i < te.size(); ++i) same += d.predictions[i] == l.predictions[i];
  CHECK(double(same) / double(te.size()) >= 0.95);
  CHECK(d.confusion.total() == te.size());

  nn::InferConfig missing;
  missing.mode = nn::ExecMode::lookup;
  CHECK_THROWS_AS(nn::infer(m, te, missing), ConfigError);
}
