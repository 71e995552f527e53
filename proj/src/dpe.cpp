#include "cirptc/dpe.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cirptc/errors.hpp"
#include "cirptc/quant.hpp"

namespace cirptc::dpe {

double prediction_residual(const DenseMatrix& gamma, const std::vector<RealVector>& xs,
                           const std::vector<RealVector>& ys) {
  if (xs.size() != ys.size() || xs.empty()) throw DimensionError("prediction_residual: sample counts differ");
  double sq = 0.0;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const RealVector p = matvec(gamma, xs[s]);
    if (ys[s].size() != p.size()) throw DimensionError("prediction_residual: output length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) sq += (ys[s][i] - p[i]) * (ys[s][i] - p[i]);
  }
  return std::sqrt(sq / double(xs.size()));
}

CrosstalkEstimate fit_gamma(const std::vector<RealVector>& xs, const std::vector<RealVector>& ys) {
  if (xs.size() != ys.size()) throw DimensionError("fit_gamma: " + std::to_string(xs.size()) + " inputs for " +
                                                   std::to_string(ys.size()) + " outputs");
  if (xs.empty()) throw RankError("fit_gamma: no samples");
  const std::size_t n = xs.front().size(), s = xs.size();
  if (s < n)
    throw RankError("fit_gamma: " + std::to_string(s) + " samples cannot determine a " + std::to_string(n) + "x" +
                    std::to_string(n) + " operator");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(long(s), long(n));
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(long(s), long(n));
  for (std::size_t k = 0; k < s; ++k) {
    if (xs[k].size() != n || ys[k].size() != n) throw DimensionError("fit_gamma: sample length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      x(long(k), long(i)) = xs[k][i];
      y(long(k), long(i)) = ys[k][i];
    }
    if (!all_finite(xs[k]) || !all_finite(ys[k])) throw NumericalError("fit_gamma: non-finite sample");
  }
  // Rows of Y are (Gamma x)^T = x^T Gamma^T, so X Gamma^T = Y.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  const Eigen::MatrixXd gt = cod.solve(y);
  CrosstalkEstimate est;
  est.samples = s;
  est.rank = std::size_t(cod.rank());
  est.rank_deficient = est.rank < n;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto sv = svd.singularValues();
  est.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  est.gamma = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) est.gamma(i, j) = gt(long(j), long(i));
  est.fit_residual = prediction_residual(est.gamma, xs, ys);
  return est;
}

TileSamples sample_tile(const sim::TileConfig& cfg, std::size_t count, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = cfg.inputs();
  std::vector<double> primaries(n, 0.0);
  for (std::size_t f = 0; f < cfg.folds(); ++f) primaries[f * cfg.l] = f == 0 ? 1.0 : 0.0;
  const sim::ProgrammedTile tile = sim::program_tile(cfg, primaries);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, cfg.input_quant.levels() - 1);
  TileSamples out;
  for (std::size_t k = 0; k < count; ++k) {
    RealVector x(n);
    for (auto& v : x) v = quant::from_code(pick(rng), cfg.input_quant);
    out.ys.push_back(sim::run_tile(cfg, tile, x, sim::mix_seed(seed, k)));
    out.xs.push_back(std::move(x));
  }
  return out;
}

CrosstalkEstimate fit_gamma_from_tile(const sim::TileConfig& cfg, std::size_t count, std::uint64_t seed) {
  if (cfg.folds() != 1) throw ConfigError("fit_gamma_from_tile: fit on an unfolded tile");
  const TileSamples s = sample_tile(cfg, count, seed);
  return fit_gamma(s.xs, s.ys);
}

RealVector forward_dpe(const circulant::BlockCirculantMatrix& w, std::span<const double> x, const DenseMatrix& gamma,
                       const DpeOptions& opt) {
  const std::size_t l = w.order();
  if (x.size() != w.cols()) throw DimensionError("forward_dpe: input length differs from the BCM width");
  if (gamma.rows() != l || gamma.cols() != l) throw DimensionError("forward_dpe: crosstalk operator is not l x l");
  const auto wq = sim::quantize_signed(w, opt.weight_bits);
  RealVector xg(x.size());
  for (std::size_t s = 0; s < x.size(); s += l) {
    RealVector seg(l);
    for (std::size_t i = 0; i < l; ++i) seg[i] = quant::quantize(x[s + i], opt.input);
    const RealVector g = matvec(gamma, seg);
    std::copy(g.begin(), g.end(), xg.begin() + long(s));
  }
  RealVector y = circulant::bcm_matvec_direct(wq, xg);
  if (opt.noise_sigma > 0.0) {
    if (opt.rng == nullptr) throw ConfigError("forward_dpe: noise requested without a generator");
    std::normal_distribution<double> normal(0.0, opt.noise_sigma);
    for (auto& v : y) v += normal(*opt.rng);
  }
  return y;
}

PhysicalBackend::PhysicalBackend(sim::TileConfig cfg, sim::FullRangeMethod method)
    : cfg_(std::move(cfg)), method_(method) {
  cfg_.validate();
}

RealVector PhysicalBackend::apply(std::size_t layer_id, const circulant::BlockCirculantMatrix& w,
                                  std::span<const double> x, double x_scale, std::uint64_t seed) {
  auto it = tiles_.find(layer_id);
  if (it == tiles_.end()) it = tiles_.emplace(layer_id, std::make_unique<sim::TiledBcm>(w, cfg_, method_)).first;
  return it->second->apply(x, seed, x_scale);
}

namespace {

struct SignedBlocks {
  double scale = 0.0;
  std::vector<std::vector<double>> pos, neg;
};

SignedBlocks split_blocks(const circulant::BlockCirculantMatrix& w, int weight_bits) {
  const auto wq = sim::quantize_signed(w, weight_bits);
  SignedBlocks s;
  s.scale = max_abs(wq.parameters());
  for (std::size_t i = 0; i < wq.block_rows(); ++i)
    for (std::size_t j = 0; j < wq.block_cols(); ++j) {
      const auto b = wq.block(i, j);
      std::vector<double> p(b.size()), n(b.size());
      for (std::size_t k = 0; k < b.size(); ++k) {
        p[k] = s.scale > 0.0 ? std::max(b[k], 0.0) / s.scale : 0.0;
        n[k] = s.scale > 0.0 ? std::max(-b[k], 0.0) / s.scale : 0.0;
      }
      s.pos.push_back(std::move(p));
      s.neg.push_back(std::move(n));
    }
  return s;
}

}  // namespace

std::vector<std::vector<double>> lut_weight_blocks(const circulant::BlockCirculantMatrix& w, int weight_bits) {
  const SignedBlocks s = split_blocks(w, weight_bits);
  std::vector<std::vector<double>> out;
  for (std::size_t b = 0; b < s.pos.size(); ++b) {
    out.push_back(s.pos[b]);
    out.push_back(s.neg[b]);
  }
  return out;
}

RealVector LutBackend::apply(std::size_t layer_id, const circulant::BlockCirculantMatrix& w, std::span<const double> x,
                             double x_scale, std::uint64_t) {
  const std::size_t l = lut_->order();
  if (w.order() != l) throw DimensionError("LutBackend: layer block order differs from the table order");
  if (x.size() != w.cols()) throw DimensionError("LutBackend: input length differs from the BCM width");
  auto it = layers_.find(layer_id);
  if (it == layers_.end()) {
    const SignedBlocks s = split_blocks(w, lut_->weight_bits());
    const quant::QuantSpec wspec{lut_->weight_bits(), 0.0, 1.0};
    Prepared p;
    p.scale = s.scale;
    for (std::size_t b = 0; b < s.pos.size(); ++b) {
      p.pos.push_back(sim::codes_of(s.pos[b], wspec));
      p.neg.push_back(sim::codes_of(s.neg[b], wspec));
    }
    it = layers_.emplace(layer_id, std::move(p)).first;
  }
  const Prepared& p = it->second;
  const quant::QuantSpec xspec{lut_->input_bits(), 0.0, 1.0};
  RealVector y(w.rows(), 0.0);
  if (p.scale == 0.0) return y;
  std::vector<std::vector<std::uint32_t>> xcodes(w.block_cols(), std::vector<std::uint32_t>(l));
  for (std::size_t j = 0; j < w.block_cols(); ++j)
    for (std::size_t k = 0; k < l; ++k) xcodes[j][k] = quant::code(x[j * l + k] / x_scale, xspec);
  for (std::size_t i = 0; i < w.block_rows(); ++i)
    for (std::size_t j = 0; j < w.block_cols(); ++j) {
      const std::size_t b = i * w.block_cols() + j;
      const RealVector& a = lut_->lookup(p.pos[b], xcodes[j]);
      const RealVector& c = lut_->lookup(p.neg[b], xcodes[j]);
      for (std::size_t k = 0; k < l; ++k) y[i * l + k] += p.scale * x_scale * (a[k] - c[k]);
    }
  return y;
}

}  // namespace cirptc::dpe
