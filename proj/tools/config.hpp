#pragma once

// Command configs are JSON objects. Every command has a complete default
// object; a user file may only set keys that exist there, with a compatible
// type. The merged object is the effective config echoed into --out.

#include <string>

#include <json.hpp>

namespace cirptc::cli {

using nlohmann::json;

// Overlays `user` on `defaults`. Keys absent from the defaults, or values of a
// different type, raise ConfigError naming the dotted path. Objects merge
// recursively; arrays and scalars replace. A default of null accepts anything.
json merge_config(const json& defaults, const json& user, const std::string& where = "");

json load_json(const std::string& path);

// Pretty-printed with a trailing newline.
std::string dump(const json& j);

}  // namespace cirptc::cli
