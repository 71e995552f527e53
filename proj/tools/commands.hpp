#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"

namespace cirptc::cli {

// What every subcommand receives after flag parsing. `overrides` holds the
// per-command flags already shaped like the config object.
struct RunRequest {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  json overrides = json::object();
};

// Defaults of every command, keyed by subcommand name.
json command_defaults(const std::string& command);

// Resolves the effective config, writes it to out_dir/config.json, runs the
// command and writes its outputs plus summary.json.
void run_command(const std::string& command, const RunRequest& req);

}  // namespace cirptc::cli
