#include "config.hpp"

#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"

namespace cirptc::cli {

namespace {

bool compatible(const json& def, const json& v) {
  if (def.is_null()) return true;
  if (def.is_number()) {
    if (def.is_number_float()) return v.is_number();
    // Integer defaults take integers only (seeds, counts).
    return v.is_number_integer() || v.is_number_unsigned();
  }
  if (def.is_string() && v.is_null()) return true;
  return def.type() == v.type();
}

}  // namespace

json merge_config(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError((where.empty() ? std::string("config") : where) + " must be an object");
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    const json& def = defaults.at(key);
    if (!compatible(def, value)) throw ConfigError("config key '" + path + "' expects " + def.type_name() +
                                                   ", got " + value.type_name());
    out[key] = def.is_object() ? merge_config(def, value, path) : value;
  }
  return out;
}

json load_json(const std::string& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace cirptc::cli
