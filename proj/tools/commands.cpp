#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cirptc/benchmark.hpp"
#include "cirptc/circulant.hpp"
#include "cirptc/conv_lowering.hpp"
#include "cirptc/device_profile.hpp"
#include "cirptc/dpe.hpp"
#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"
#include "cirptc/formats.hpp"
#include "cirptc/lut.hpp"
#include "cirptc/photonic_conv.hpp"
#include "cirptc/photonics.hpp"
#include "cirptc/synthetic.hpp"
#include "cirptc/train.hpp"

namespace cirptc::cli {

namespace {

namespace fs = std::filesystem;

json dataset_defaults(std::size_t count, std::uint64_t seed) {
  return {{"source", "synthetic_digits"},
          {"count", count},
          {"seed", seed},
          {"images", ""},
          {"labels", ""},
          {"path", ""},
          {"first", 0},
          {"limit", 0},
          {"shuffle", false},
          {"shuffle_seed", 0}};
}

json tile_defaults() { return {{"profile", ""}, {"device", nullptr}}; }

void add(json& a, const json& b) {
  for (const auto& [k, v] : b.items()) a[k] = v;
}

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& dir, const std::string& name, const json& j) {
  io::write_file_atomic(out_path(dir, name), dump(j));
}

std::string csv_double(double v) { return io::format_double(v); }

// ---------------------------------------------------------------- inputs

data::Dataset load_dataset(const json& spec) {
  const std::string source = spec.at("source");
  data::Dataset d;
  if (source == "synthetic_digits")
    d = data::synthetic_digits(spec.at("count"), spec.at("seed"));
  else if (source == "synthetic_color")
    d = data::synthetic_color(spec.at("count"), spec.at("seed"));
  else if (source == "synthetic_xray")
    d = data::synthetic_xray(spec.at("count"), spec.at("seed"));
  else if (source == "idx")
    d = io::load_idx(spec.at("images"), spec.at("labels"));
  else if (source == "cifar")
    d = io::load_cifar(spec.at("path"));
  else
    throw ConfigError("unknown dataset source '" + source + "'");
  const std::size_t first = spec.at("first"), limit = spec.at("limit");
  if (first > d.size()) throw ConfigError("dataset first index is past the end");
  const std::size_t count = limit == 0 ? d.size() - first : std::min(limit, d.size() - first);
  if (first != 0 || count != d.size()) d = d.subset(first, count);
  if (spec.at("shuffle").get<bool>()) d = d.shuffled(spec.at("shuffle_seed"));
  d.validate();
  return d;
}

// Flattens samples for a fully connected model.
data::Dataset flattened(data::Dataset d) {
  d.channels = d.sample_size();
  d.height = d.width = 1;
  return d;
}

// Loads the profile and applies the inline device overrides; the resolved
// device replaces the overrides in the echoed config.
sim::TileConfig resolve_device(json& cfg) {
  const std::string path = cfg.at("profile");
  sim::TileConfig tile = path.empty() ? io::default_device_profile() : io::load_device_profile(path);
  if (!cfg.at("device").is_null()) tile = io::device_from_json(cfg.at("device"), tile);
  cfg["device"] = io::device_to_json(tile);
  return tile;
}

DenseMatrix load_gamma(const std::string& path) {
  const json j = load_json(path);
  if (j.value("format", "") != "cirptc-gamma") throw FormatError(FormatError::Kind::bad_magic, path + " is not a gamma file");
  const auto rows = j.at("gamma").get<std::vector<std::vector<double>>>();
  DenseMatrix g(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw DimensionError("gamma must be square");
    for (std::size_t k = 0; k < rows.size(); ++k) g(i, k) = rows[i][k];
  }
  return g;
}

json matrix_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

nn::ExecMode parse_mode(const std::string& s) {
  if (s == "digital") return nn::ExecMode::digital;
  if (s == "dpe") return nn::ExecMode::dpe;
  if (s == "lookup") return nn::ExecMode::lookup;
  throw ConfigError("unknown mode '" + s + "' (digital, dpe, lookup)");
}

json param_json(nn::Model& model) {
  const nn::ParamReport r = nn::param_report(model);
  json tensors = json::array();
  for (const auto& t : r.tensors)
    tensors.push_back({{"name", t.name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"padded_rows", t.padded_rows},
                       {"padded_cols", t.padded_cols},
                       {"stored", t.stored}});
  return {{"tensors", tensors},
          {"stored_weights", r.stored_weights},
          {"padded_dense_weights", r.padded_dense_weights},
          {"logical_dense_weights", r.logical_dense_weights},
          {"other_params", r.other_params},
          {"weight_reduction_padded", r.weight_reduction_padded()},
          {"weight_reduction_logical", r.weight_reduction_logical()}};
}

std::string confusion_csv(const nn::ConfusionMatrix& cm) {
  std::ostringstream os;
  os << "truth";
  for (std::size_t p = 0; p < cm.classes(); ++p) os << ",pred_" << p;
  os << '\n';
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    os << t;
    for (std::size_t p = 0; p < cm.classes(); ++p) os << ',' << cm.at(t, p);
    os << '\n';
  }
  return os.str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json class_metrics_json(const nn::ConfusionMatrix& cm) {
  json all = json::array();
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto m = nn::classify_metrics(cm, c);
    all.push_back({{"class", c}, {"sensitivity", optional_json(m.sensitivity)}, {"specificity", optional_json(m.specificity)}});
  }
  return all;
}

// ---------------------------------------------------------------- convolve

json convolve_defaults() {
  json d = {{"seed", 1},
            {"image", ""},
            {"scene", {{"channels", 3}, {"height", 32}, {"width", 32}, {"seed", 2024}}},
            {"kernel", "blur"},
            {"custom_kernel", json::array()},
            {"k", 3},
            {"noise", true},
            {"pgm_range", json::array()},
            {"waveform", {{"windows", 16}, {"symbol_period_s", 80e-6}}}};
  add(d, tile_defaults());
  return d;
}

json run_convolve(json& cfg, const std::string& out) {
  sim::TileConfig base = resolve_device(cfg);
  const std::uint64_t seed = cfg.at("seed");
  const std::size_t k = cfg.at("k");
  std::vector<double> kernel;
  const std::string name = cfg.at("kernel");
  if (name == "blur")
    kernel.assign(std::begin(sim::kBlurKernel), std::end(sim::kBlurKernel));
  else if (name == "sobel")
    kernel.assign(std::begin(sim::kSobelKernel), std::end(sim::kSobelKernel));
  else if (name == "custom")
    kernel = cfg.at("custom_kernel").get<std::vector<double>>();
  else
    throw ConfigError("kernel must be blur, sobel or custom");
  if (name != "custom" && k != 3) throw ConfigError("the blur and sobel kernels are 3 x 3");

  conv::ImageTensor img;
  const std::string image_path = cfg.at("image");
  if (image_path.empty()) {
    const json& s = cfg.at("scene");
    img = data::test_scene(s.at("channels"), s.at("height"), s.at("width"), s.at("seed"));
  } else {
    img = io::read_pnm(image_path);
  }

  if (!cfg.at("noise").get<bool>()) base.noise.enabled = false;
  sim::TileConfig tile = sim::folded_tile(base, sim::folds_for_kernel(k, base.l));
  tile.noise.seed = seed;
  spdlog::info("convolve: {}x{}x{} image, {}x{} kernel, {} folds", img.channels, img.height, img.width, k, k,
               tile.folds());
  const sim::PhotonicConv r = sim::convolve_photonic(img, kernel, k, tile, seed);

  double lo, hi;
  const json range = cfg.at("pgm_range");
  if (range.empty()) {
    const auto [mn, mx] = std::minmax_element(r.ideal.data.begin(), r.ideal.data.end());
    lo = *mn;
    hi = *mx;
    cfg["pgm_range"] = {lo, hi};
  } else {
    if (range.size() != 2) throw ConfigError("pgm_range must be [lo, hi] or empty");
    lo = range[0];
    hi = range[1];
  }
  if (!(hi > lo)) throw ConfigError("pgm_range must have hi > lo");

  for (std::size_t c = 0; c < img.channels; ++c) {
    const std::string sfx = "_c" + std::to_string(c) + ".pgm";
    io::write_pgm(out_path(out, "input" + sfx), img, c, 0.0, 1.0);
    io::write_pgm(out_path(out, "ideal" + sfx), r.ideal, c, lo, hi);
    io::write_pgm(out_path(out, "simulated" + sfx), r.simulated, c, lo, hi);
  }
  std::ostringstream fm;
  fm << "channel,y,x,ideal,simulated\n";
  for (std::size_t c = 0; c < r.ideal.channels; ++c)
    for (std::size_t y = 0; y < r.ideal.height; ++y)
      for (std::size_t x = 0; x < r.ideal.width; ++x)
        fm << c << ',' << y << ',' << x << ',' << csv_double(r.ideal.at(c, y, x)) << ','
           << csv_double(r.simulated.at(c, y, x)) << '\n';
  io::write_file_atomic(out_path(out, "feature_maps.csv"), fm.str());

  // Time-domain record of the first windows streamed through one tile pass.
  json waveform = nullptr;
  const std::size_t windows = cfg.at("waveform").at("windows");
  if (!r.signed_kernel && windows > 0) {
    const auto ext = circulant::circulant_extend_kernel(kernel, tile.l, 0);
    const auto wt = circulant::bcm_transpose(ext.bcm);
    std::vector<double> prim(wt.parameters().begin(), wt.parameters().end());
    for (auto& v : prim) v /= r.weight_scale;
    const DenseMatrix cols = conv::im2col_shared(img, k);
    const std::size_t n = std::min(windows, cols.cols());
    DenseMatrix xs(tile.inputs(), n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t i = 0; i < k * k; ++i) xs(i, p) = cols(i, p);
    const auto stream = sim::run_mvm_stream(prim, xs, tile, cfg.at("waveform").at("symbol_period_s"));
    sim::write_stream_csv(stream, out_path(out, "waveform.csv"));
    waveform = {{"file", "waveform.csv"}, {"windows", n}, {"rate_baud", stream.rate_baud},
                {"target_port", ext.target_column}};
  }

  return {{"nrmse", sim::normalized_rmse(r.ideal, r.simulated)},
          {"tile_passes", r.tile_passes},
          {"weight_scale", r.weight_scale},
          {"signed_kernel", r.signed_kernel},
          {"folds", tile.folds()},
          {"output_shape", {r.ideal.channels, r.ideal.height, r.ideal.width}},
          {"waveform", waveform}};
}

// ---------------------------------------------------------------- train

json train_defaults() {
  return {{"seed", 1},
          {"model", {{"arch", "desk_cnn"}, {"order", 4}, {"hidden", json::array({64})}, {"act_hi", 1.0}}},
          {"data", dataset_defaults(3000, 1)},
          {"test_data", dataset_defaults(300, 2)},
          {"train",
           {{"mode", "digital"},
            {"epochs", 6},
            {"batch_size", 32},
            {"learning_rate", 0.01},
            {"momentum", 0.9},
            {"quantize", true},
            {"noise_sigma_rel", 0.0},
            {"gamma", ""}}}};
}

nn::Model build_model(const json& m, const data::Dataset& d) {
  const std::string arch = m.at("arch");
  const std::size_t order = m.at("order");
  if (arch == "desk_cnn") return nn::desk_cnn(order, d.classes);
  if (arch == "mlp") {
    std::vector<std::size_t> widths{d.sample_size()};
    for (const auto& h : m.at("hidden")) widths.push_back(h.get<std::size_t>());
    widths.push_back(d.classes);
    return nn::make_mlp(widths, order, d.classes, m.at("act_hi"));
  }
  throw ConfigError("model arch must be desk_cnn or mlp");
}

json run_train(json& cfg, const std::string& out) {
  const std::uint64_t seed = cfg.at("seed");
  const bool mlp = cfg.at("model").at("arch") == "mlp";
  data::Dataset train_set = load_dataset(cfg.at("data"));
  data::Dataset test_set = load_dataset(cfg.at("test_data"));
  if (mlp) {
    train_set = flattened(std::move(train_set));
    test_set = flattened(std::move(test_set));
  }
  nn::Model model = build_model(cfg.at("model"), train_set);
  model.init(seed);

  const json& t = cfg.at("train");
  nn::TrainConfig tc;
  tc.mode = parse_mode(t.at("mode"));
  tc.epochs = t.at("epochs");
  tc.batch_size = t.at("batch_size");
  tc.learning_rate = t.at("learning_rate");
  tc.momentum = t.at("momentum");
  tc.quantize = t.at("quantize");
  tc.noise_sigma_rel = t.at("noise_sigma_rel");
  tc.seed = seed;
  const std::string gamma_path = t.at("gamma");
  if (!gamma_path.empty()) tc.gamma = load_gamma(gamma_path);

  std::ostringstream hist;
  hist << "epoch,loss,train_accuracy\n";
  const auto history = nn::train(model, train_set, tc, [&](const nn::EpochStats& s) {
    spdlog::info("epoch {}: loss {:.4f}, train accuracy {:.4f}", s.epoch + 1, s.loss, s.accuracy);
    hist << s.epoch + 1 << ',' << csv_double(s.loss) << ',' << csv_double(s.accuracy) << '\n';
  });
  io::write_file_atomic(out_path(out, "history.csv"), hist.str());

  // Next epoch's shuffle stream, so a resumed run continues the sequence.
  std::ostringstream rng_state;
  rng_state << std::mt19937_64(sim::mix_seed(seed, tc.epochs + 1));
  io::Checkpoint ck{model.clone(), tc.gamma, seed, rng_state.str()};
  io::save_checkpoint(out_path(out, "checkpoint.cptc"), ck);

  nn::InferConfig ic;
  ic.quantize = tc.quantize;
  ic.seed = seed;
  const auto test = nn::infer(model, test_set, ic);
  io::write_file_atomic(out_path(out, "test_confusion.csv"), confusion_csv(test.confusion));
  return {{"final_loss", history.epochs.back().loss},
          {"final_train_accuracy", history.epochs.back().accuracy},
          {"test_accuracy_digital", test.accuracy},
          {"train_samples", train_set.size()},
          {"test_samples", test_set.size()},
          {"parameters", param_json(model)},
          {"checkpoint", "checkpoint.cptc"}};
}

// ---------------------------------------------------------------- infer

json infer_defaults() {
  json d = {{"seed", 1},
            {"checkpoint", ""},
            {"data", dataset_defaults(300, 2)},
            {"mode", "digital"},
            {"quantize", true},
            {"batch_size", 64},
            {"noise_sigma_rel", 0.0},
            {"gamma", ""},
            {"backend", "physical"},
            {"lut", ""}};
  add(d, tile_defaults());
  return d;
}

json run_infer(json& cfg, const std::string& out) {
  const std::string ck_path = cfg.at("checkpoint");
  if (ck_path.empty()) throw ConfigError("infer needs a checkpoint");
  io::Checkpoint ck = io::load_checkpoint(ck_path);
  data::Dataset d = load_dataset(cfg.at("data"));
  if (ck.model.input_shape().h == 1 && ck.model.input_shape().w == 1 && d.height * d.width > 1) d = flattened(std::move(d));

  nn::InferConfig ic;
  ic.mode = parse_mode(cfg.at("mode"));
  ic.quantize = cfg.at("quantize");
  ic.batch_size = cfg.at("batch_size");
  ic.seed = cfg.at("seed");
  ic.noise_sigma_rel = cfg.at("noise_sigma_rel");
  const std::string gamma_path = cfg.at("gamma");
  ic.gamma = gamma_path.empty() ? ck.gamma : load_gamma(gamma_path);

  const sim::TileConfig tile = resolve_device(cfg);
  std::unique_ptr<nn::MvmBackend> backend;
  sim::Lut lut;
  if (ic.mode == nn::ExecMode::lookup) {
    const std::string kind = cfg.at("backend");
    if (kind == "physical") {
      backend = std::make_unique<dpe::PhysicalBackend>(tile);
    } else if (kind == "lut") {
      const std::string lut_path = cfg.at("lut");
      if (lut_path.empty()) throw ConfigError("the lut backend needs a lut file");
      lut = sim::Lut::load(lut_path);
      backend = std::make_unique<dpe::LutBackend>(lut);
    } else {
      throw ConfigError("backend must be physical or lut");
    }
    ic.backend = backend.get();
  }
  const auto r = nn::infer(ck.model, d, ic);

  std::ostringstream pred;
  pred << "index,label,prediction\n";
  for (std::size_t i = 0; i < d.size(); ++i) pred << i << ',' << d.labels[i] << ',' << r.predictions[i] << '\n';
  io::write_file_atomic(out_path(out, "predictions.csv"), pred.str());
  io::write_file_atomic(out_path(out, "confusion.csv"), confusion_csv(r.confusion));
  spdlog::info("accuracy {:.4f} over {} samples", r.accuracy, d.size());
  return {{"accuracy", r.accuracy}, {"samples", d.size()}, {"classes", class_metrics_json(r.confusion)}};
}

// ---------------------------------------------------------------- fit-dpe

json fit_dpe_defaults() {
  json d = {{"seed", 1}, {"samples", 400}, {"validation_samples", 400}};
  add(d, tile_defaults());
  return d;
}

json run_fit_dpe(json& cfg, const std::string& out) {
  const sim::TileConfig tile = resolve_device(cfg);
  const std::uint64_t seed = cfg.at("seed");
  const auto est = dpe::fit_gamma_from_tile(tile, cfg.at("samples"), seed);
  const auto val = dpe::sample_tile(tile, cfg.at("validation_samples"), sim::mix_seed(seed, 1));
  const double fitted = dpe::prediction_residual(est.gamma, val.xs, val.ys);
  const double ident = dpe::prediction_residual(DenseMatrix::identity(tile.l), val.xs, val.ys);
  const json g = {{"format", "cirptc-gamma"},
                  {"version", 1},
                  {"order", tile.l},
                  {"gamma", matrix_json(est.gamma)},
                  {"fit_residual", est.fit_residual},
                  {"samples", est.samples},
                  {"rank", est.rank},
                  {"condition", est.condition},
                  {"rank_deficient", est.rank_deficient}};
  write_json(out, "gamma.json", g);
  spdlog::info("validation residual: fitted {:.3e}, identity {:.3e}", fitted, ident);
  return {{"gamma", "gamma.json"},
          {"fit_residual", est.fit_residual},
          {"validation_residual_fitted", fitted},
          {"validation_residual_identity", ident},
          {"rank", est.rank},
          {"condition", est.condition},
          {"rank_deficient", est.rank_deficient}};
}

// ---------------------------------------------------------------- build-lut

json build_lut_defaults() {
  json d = {{"seed", 1},
            {"checkpoint", ""},
            {"layer", -1},
            {"weight_blocks", json::array()},
            {"policy", "random"},
            {"samples", 256}};
  add(d, tile_defaults());
  return d;
}

json run_build_lut(json& cfg, const std::string& out) {
  sim::TileConfig tile = resolve_device(cfg);
  tile.noise.seed = cfg.at("seed");
  std::vector<std::vector<double>> blocks;
  const std::string ck_path = cfg.at("checkpoint");
  if (!ck_path.empty()) {
    io::Checkpoint ck = io::load_checkpoint(ck_path);
    const long layer = cfg.at("layer");
    bool found = false;
    for (std::size_t i = 0; i < ck.model.size(); ++i) {
      nn::Layer& l = ck.model.layer(i);
      if (layer >= 0 && l.id != std::size_t(layer)) continue;
      const circulant::BlockCirculantMatrix* w = nullptr;
      if (auto* lin = dynamic_cast<nn::CirculantLinear*>(&l)) w = &lin->weights.w;
      if (auto* conv = dynamic_cast<nn::CirculantConv*>(&l)) w = &conv->weights.w;
      if (!w) continue;
      found = true;
      for (auto& b : dpe::lut_weight_blocks(*w, ck.model.weight_bits)) blocks.push_back(std::move(b));
    }
    if (!found) throw ConfigError("checkpoint has no circulant layer matching the requested id");
  }
  for (const auto& b : cfg.at("weight_blocks")) blocks.push_back(b.get<std::vector<double>>());
  if (blocks.empty()) throw ConfigError("build-lut needs a checkpoint or explicit weight_blocks");
  // Blocks with the same codes share one table entry set.
  std::set<std::vector<std::uint32_t>> seen;
  std::vector<std::vector<double>> unique;
  for (auto& b : blocks)
    if (seen.insert(sim::codes_of(b, tile.weight_quant)).second) unique.push_back(std::move(b));
  blocks = std::move(unique);

  sim::LutPolicy policy;
  const std::string kind = cfg.at("policy");
  if (kind == "full")
    policy.kind = sim::LutPolicy::Kind::full;
  else if (kind == "random")
    policy.kind = sim::LutPolicy::Kind::random;
  else
    throw ConfigError("policy must be full or random");
  policy.samples = cfg.at("samples");
  policy.seed = cfg.at("seed");
  spdlog::info("tabulating {} weight blocks", blocks.size());
  const sim::Lut lut = sim::build_lut(tile, blocks, policy);
  lut.save(out_path(out, "lut.jsonl"));
  return {{"lut", "lut.jsonl"}, {"entries", lut.size()}, {"weight_blocks", lut.weight_blocks()}};
}

// ---------------------------------------------------------------- benchmark

json benchmark_defaults() {
  return {{"hardware", ""},
          {"hardware_overrides", nullptr},
          {"sweep",
           {{"sizes", {8, 16, 32, 48, 64}},
            {"folds", {1, 4}},
            {"f_op_hz", {10e9}},
            {"mrr_thermal", {true, false}}}},
          {"fold_comparison", 4},
          {"laser_fraction_size", 64}};
}

json run_benchmark(json& cfg, const std::string& out) {
  using namespace bench;
  const std::string path = cfg.at("hardware");
  HardwareConfig hw = path.empty() ? default_hardware() : hardware_from_json(load_json(path));
  if (!cfg.at("hardware_overrides").is_null()) hw = hardware_from_json(cfg.at("hardware_overrides"), hw);
  hw.validate();
  cfg["hardware_overrides"] = hardware_to_json(hw);
  write_json(out, "hardware.json", hardware_to_json(hw));

  const json& s = cfg.at("sweep");
  SweepRanges ranges;
  ranges.sizes = s.at("sizes").get<std::vector<std::size_t>>();
  ranges.folds = s.at("folds").get<std::vector<std::size_t>>();
  ranges.f_op_hz = s.at("f_op_hz").get<std::vector<double>>();
  ranges.mrr_thermal = s.at("mrr_thermal").get<std::vector<bool>>();
  const auto rows = sweep(hw, ranges);
  io::write_file_atomic(out_path(out, "sweep.csv"), sweep_csv(rows));

  const PowerBreakdown p = power_breakdown(hw);
  std::ostringstream bd;
  bd << "component,watts,fraction\n";
  const std::pair<const char*, Watts> parts[] = {{"laser", p.laser}, {"input_modulators", p.input_mod},
                                                 {"weight_mrr", p.weight_mrr}, {"adc", p.adc},
                                                 {"tia", p.tia}, {"static", p.stat},
                                                 {"weight_dac", p.weight_dac}};
  for (const auto& [name, w] : parts) bd << name << ',' << csv_double(w.value) << ',' << csv_double(p.fraction(w)) << '\n';
  bd << "total," << csv_double(p.total.value) << ",1\n";
  io::write_file_atomic(out_path(out, "breakdown.csv"), bd.str());

  HardwareConfig folded = hw;
  folded.r = cfg.at("fold_comparison");
  HardwareConfig cold = folded;
  cold.mrr_thermal_enabled = false;
  HardwareConfig big = hw;
  big.M = big.N = cfg.at("laser_fraction_size");
  const PowerBreakdown pb = power_breakdown(big);

  double best = -1.0;
  std::size_t peak = 0;
  for (const auto n : ranges.sizes) {
    HardwareConfig c = hw;
    c.M = c.N = n;
    const double e = efficiency_and_density(c).tops_per_watt;
    if (e > best) best = e, peak = n;
  }
  const auto e = efficiency_and_density(hw), ef = efficiency_and_density(folded), ec = efficiency_and_density(cold);
  const auto lat = latency_bound(hw);
  return {{"ops_tops", ops_rate(hw).value / 1e12},
          {"tops_per_w", e.tops_per_watt},
          {"tops_per_mm2", e.tops_per_mm2},
          {"total_power_w", p.total.value},
          {"folded",
           {{"r", folded.r},
            {"ops_tops", ops_rate(folded).value / 1e12},
            {"tops_per_w", ef.tops_per_watt},
            {"tops_per_mm2", ef.tops_per_mm2},
            {"tops_per_w_thermal_off", ec.tops_per_watt},
            {"weight_mrr_count", folded.weight_mrr_count()},
            {"thermal_power_delta_w", (power_breakdown(folded).total - power_breakdown(cold).total).value}}},
          {"laser_fraction", {{"size", big.M}, {"fraction", pb.fraction(pb.laser)}}},
          {"compression_ratio", compare_uncompressed(hw)},
          {"compression_ratio_folded", compare_uncompressed(folded)},
          {"efficiency_peak_size", peak},
          {"f_max_hz", lat.f_max ? json(lat.f_max->value) : json(nullptr)},
          {"feasible", lat.feasible},
          {"sweep", "sweep.csv"}};
}

// ---------------------------------------------------------------- sweep-q

json sweep_q_defaults() {
  return {{"max_channels", 64},
          {"bits", {1, 2, 3, 4, 5, 6, 7, 8}},
          {"geometry", {{"wavelength_nm", 1550.0}, {"fsr_nm", 4.8}, {"lsb_fraction", 0.5}}},
          {"report", {{"channels", 48}, {"bits", 6}}}};
}

json run_sweep_q(json& cfg, const std::string& out) {
  photonics::QBoundGeometry g;
  g.wavelength_nm = cfg.at("geometry").at("wavelength_nm");
  g.fsr_nm = cfg.at("geometry").at("fsr_nm");
  g.lsb_fraction = cfg.at("geometry").at("lsb_fraction");
  const std::size_t max_n = cfg.at("max_channels");
  const auto bits = cfg.at("bits").get<std::vector<int>>();
  if (max_n < 2 || bits.empty()) throw ConfigError("sweep-q needs max_channels >= 2 and at least one bit width");
  std::ostringstream os;
  os << "channels,bits,min_q,fwhm_nm,aggregate_leakage\n";
  bool monotone_n = true, monotone_bits = true;
  std::vector<double> prev_by_bits(bits.size(), 0.0);
  for (std::size_t n = 2; n <= max_n; ++n) {
    double prev_b = 0.0;
    for (std::size_t b = 0; b < bits.size(); ++b) {
      const double q = photonics::min_q_for_resolution(n, bits[b], g);
      os << n << ',' << bits[b] << ',' << csv_double(q) << ',' << csv_double(g.wavelength_nm / q) << ','
         << csv_double(photonics::aggregate_leakage(n, q, g)) << '\n';
      monotone_n &= q >= prev_by_bits[b];
      if (b > 0 && bits[b] > bits[b - 1]) monotone_bits &= q >= prev_b;
      prev_by_bits[b] = q;
      prev_b = q;
    }
  }
  io::write_file_atomic(out_path(out, "q_bound.csv"), os.str());
  const std::size_t rn = cfg.at("report").at("channels");
  const int rb = cfg.at("report").at("bits");
  return {{"min_q", photonics::min_q_for_resolution(rn, rb, g)},
          {"channels", rn},
          {"bits", rb},
          {"monotone_in_channels", monotone_n},
          {"monotone_in_bits", monotone_bits},
          {"table", "q_bound.csv"}};
}

struct Command {
  const char* name;
  json (*defaults)();
  json (*run)(json&, const std::string&);
};

constexpr Command kCommands[] = {
    {"convolve", convolve_defaults, run_convolve}, {"train", train_defaults, run_train},
    {"infer", infer_defaults, run_infer},          {"fit-dpe", fit_dpe_defaults, run_fit_dpe},
    {"build-lut", build_lut_defaults, run_build_lut}, {"benchmark", benchmark_defaults, run_benchmark},
    {"sweep-q", sweep_q_defaults, run_sweep_q},
};

const Command& find(const std::string& name) {
  for (const auto& c : kCommands)
    if (name == c.name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace

json command_defaults(const std::string& command) { return find(command).defaults(); }

void run_command(const std::string& command, const RunRequest& req) {
  const Command& cmd = find(command);
  const json defaults = cmd.defaults();
  json cfg = defaults;
  if (!req.config_path.empty()) cfg = merge_config(cfg, load_json(req.config_path));
  cfg = merge_config(cfg, req.overrides);
  if (req.seed) {
    if (!cfg.contains("seed")) throw ConfigError(command + " takes no seed");
    cfg["seed"] = *req.seed;
  }
  if (req.out_dir.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(req.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + req.out_dir + ": " + ec.message());

  json summary = cmd.run(cfg, req.out_dir);
  // Written after the run so resolved values (device, ranges) are echoed.
  write_json(req.out_dir, "config.json", cfg);
  write_json(req.out_dir, "summary.json", {{"command", command}, {"summary", summary}});
}

}  // namespace cirptc::cli
