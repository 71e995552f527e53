#pragma once

// Device profiles as JSON. Key names carry their units; unknown keys are
// rejected; absent keys keep the default profile's value.

#include <string>

#include <json.hpp>

#include "cirptc/tile_sim.hpp"

namespace cirptc::io {

// Output deviation (relative to tile full scale) calibrated so the blur demo
// reproduces the measured normalized RMSE.
inline constexpr double kCalibratedSigmaRel = 0.0053627;

// Prototype four-channel tile, crosstalk on, calibrated noise.
sim::TileConfig default_device_profile();

nlohmann::json device_to_json(const sim::TileConfig& cfg);
// Overrides applied on top of `base`.
sim::TileConfig device_from_json(const nlohmann::json& j, const sim::TileConfig& base = default_device_profile());
sim::TileConfig load_device_profile(const std::string& path);

// Rejects any key of `j` not in `allowed`; `where` names the object in the message.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace cirptc::io
