#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "cirptc/errors.hpp"
#include "commands.hpp"

namespace {

// Exit codes, one per error class.
enum Exit : int {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kIo = 3,
  kFormat = 4,
  kDimension = 5,
  kDomain = 6,
  kDeviceRange = 7,
  kRank = 8,
  kNumerical = 9,
  kLutKey = 10,
};

int exit_code_for(const std::exception& e) {
  using namespace cirptc;
  if (dynamic_cast<const FormatError*>(&e)) return kFormat;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const ConfigError*>(&e)) return kConfig;
  if (dynamic_cast<const DimensionError*>(&e)) return kDimension;
  if (dynamic_cast<const DomainError*>(&e)) return kDomain;
  if (dynamic_cast<const DeviceRangeError*>(&e)) return kDeviceRange;
  if (dynamic_cast<const RankError*>(&e)) return kRank;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  if (dynamic_cast<const LutKeyError*>(&e)) return kLutKey;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kConfig;
  return kUnexpected;
}

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("cirptc");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* lvl = std::getenv("CIRPTC_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Circulant photonic tensor core simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cirptc 1.0");

  using cirptc::cli::json;
  struct Sub {
    cirptc::cli::RunRequest req;
    std::uint64_t seed = 0;
    std::string profile;
    std::map<std::string, std::string> strings;
    std::map<std::string, double> numbers;
    std::map<std::string, std::size_t> counts;
    bool flag = false;
  };
  std::map<std::string, Sub> subs;

  const std::pair<const char*, const char*> commands[] = {
      {"convolve", "Run an image kernel through the simulated tile"},
      {"train", "Train a block-circulant network"},
      {"infer", "Evaluate a checkpoint in digital, dpe or lookup mode"},
      {"fit-dpe", "Fit the per-tile crosstalk operator"},
      {"build-lut", "Tabulate simulated tile responses"},
      {"benchmark", "Throughput, power and area model report"},
      {"sweep-q", "Minimum switch Q over channel counts and bit widths"},
  };
  for (const auto& [name, help] : commands) {
    Sub& s = subs[name];
    CLI::App* c = app.add_subcommand(name, help);
    c->add_option("--config", s.req.config_path, "JSON config; unknown keys are rejected")->check(CLI::ExistingFile);
    c->add_option("--out", s.req.out_dir, "Output directory")->required();
    if (std::string(name) != "benchmark" && std::string(name) != "sweep-q")
      c->add_option("--seed", s.seed, "Run seed (overrides the config)");
    const std::string n = name;
    if (n == "convolve" || n == "infer" || n == "fit-dpe" || n == "build-lut")
      c->add_option("--profile", s.strings["profile"], "Device profile JSON");
    if (n == "convolve") {
      c->add_option("--image", s.strings["image"], "PGM/PPM input (default: synthetic scene)");
      c->add_option("--kernel", s.strings["kernel"], "blur, sobel or custom");
      c->add_flag("--no-noise", s.flag, "Disable the output deviation");
    }
    if (n == "train") {
      c->add_option("--mode", s.strings["train.mode"], "digital or dpe");
      c->add_option("--epochs", s.counts["train.epochs"], "Training epochs");
      c->add_option("--lr", s.numbers["train.learning_rate"], "Learning rate");
      c->add_option("--gamma", s.strings["train.gamma"], "gamma.json from fit-dpe (dpe mode)");
      c->add_option("--order", s.counts["model.order"], "Block order");
    }
    if (n == "infer") {
      c->add_option("--checkpoint", s.strings["checkpoint"], "Checkpoint from train");
      c->add_option("--mode", s.strings["mode"], "digital, dpe or lookup");
      c->add_option("--backend", s.strings["backend"], "physical or lut (lookup mode)");
      c->add_option("--lut", s.strings["lut"], "Table from build-lut");
      c->add_option("--gamma", s.strings["gamma"], "gamma.json from fit-dpe (dpe mode)");
    }
    if (n == "fit-dpe") c->add_option("--samples", s.counts["samples"], "Fit samples");
    if (n == "build-lut") {
      c->add_option("--checkpoint", s.strings["checkpoint"], "Checkpoint whose weight blocks are tabulated");
      c->add_option("--policy", s.strings["policy"], "full or random");
      c->add_option("--samples", s.counts["samples"], "Input vectors per block (random policy)");
    }
    if (n == "benchmark") c->add_option("--hardware", s.strings["hardware"], "Hardware profile JSON");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  for (auto* c : app.get_subcommands()) {
    Sub& s = subs.at(c->get_name());
    // Only flags the user actually gave become overrides.
    auto set = [&](const std::string& dotted, const json& v) {
      json* node = &s.req.overrides;
      std::size_t start = 0, dot;
      while ((dot = dotted.find('.', start)) != std::string::npos) {
        node = &(*node)[dotted.substr(start, dot - start)];
        start = dot + 1;
      }
      (*node)[dotted.substr(start)] = v;
    };
    auto given = [&](const std::string& dotted) {
      const std::string leaf = dotted.substr(dotted.rfind('.') + 1);
      static const std::map<std::string, std::string> flag_of{{"learning_rate", "--lr"}};
      const auto it = flag_of.find(leaf);
      std::string flag = it != flag_of.end() ? it->second : "--" + leaf;
      return c->count(flag) > 0;
    };
    for (const auto& [k, v] : s.strings)
      if (given(k)) set(k, v);
    for (const auto& [k, v] : s.numbers)
      if (given(k)) set(k, v);
    for (const auto& [k, v] : s.counts)
      if (given(k)) set(k, v);
    if (s.flag) set("noise", false);
    if (c->get_option_no_throw("--seed") && c->count("--seed")) s.req.seed = s.seed;
    try {
      cirptc::cli::run_command(c->get_name(), s.req);
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return exit_code_for(e);
    }
  }
  return kOk;
}
