#include "cirptc/device_profile.hpp"

#include <algorithm>

#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"

namespace cirptc::io {

using nlohmann::json;

sim::TileConfig default_device_profile() {
  sim::TileConfig cfg = sim::prototype_tile();
  cfg.crosstalk_on = true;
  cfg.noise.enabled = true;
  cfg.noise.sigma_rel = kCalibratedSigmaRel;
  return cfg;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
}

namespace {

const char* branch_name(photonics::Branch b) { return b == photonics::Branch::left ? "left" : "right"; }

photonics::Branch parse_branch(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "left") return photonics::Branch::left;
  if (s == "right") return photonics::Branch::right;
  throw ConfigError("branch must be \"left\" or \"right\", got \"" + s + "\"");
}

json mrr_json(const photonics::MrrParams& p) {
  return {{"quality_factor", p.quality_factor},
          {"fsr_nm", p.fsr_nm},
          {"coupling_asymmetry", p.coupling_asymmetry},
          {"insertion_loss_db", p.insertion_loss_db},
          {"branch", branch_name(p.branch)}};
}

void read_mrr(const json& j, photonics::MrrParams& p, const std::string& where) {
  reject_unknown_keys(j, {"quality_factor", "fsr_nm", "coupling_asymmetry", "insertion_loss_db", "branch"}, where);
  if (j.contains("quality_factor")) p.quality_factor = j["quality_factor"].get<double>();
  if (j.contains("fsr_nm")) p.fsr_nm = j["fsr_nm"].get<double>();
  if (j.contains("coupling_asymmetry")) p.coupling_asymmetry = j["coupling_asymmetry"].get<double>();
  if (j.contains("insertion_loss_db")) p.insertion_loss_db = j["insertion_loss_db"].get<double>();
  if (j.contains("branch")) p.branch = parse_branch(j["branch"]);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

}  // namespace

json device_to_json(const sim::TileConfig& c) {
  std::vector<std::string> branches;
  for (auto b : c.weight_branches) branches.emplace_back(branch_name(b));
  const auto base = c.plan.base_channels();
  json resp = json::array();
  for (const auto& [nm, r] : c.pd.responsivity) resp.push_back({nm, r});
  return {{"format", "cirptc-device"},
          {"version", 1},
          {"tile",
           {{"order", c.l},
            {"channels_nm", std::vector<double>(base.begin(), base.end())},
            {"plan_fsr_nm", c.plan.fsr_nm()},
            {"folds", c.plan.folds()},
            {"weight_branches", branches},
            {"channel_power_w", c.channel_power_w},
            {"weight_headroom", c.weight_headroom},
            {"max_detuning_nm", c.max_detuning_nm},
            {"weight_bits", c.weight_quant.bits},
            {"input_bits", c.input_quant.bits},
            {"adc_bits", c.adc_bits},
            {"crosstalk_on", c.crosstalk_on},
            {"dark_subtract", c.dark_subtract},
            {"responsivity_compensation", c.responsivity_compensation}}},
          {"mzm",
           {{"extinction_ratio_db", c.mzm.extinction_ratio_db},
            {"insertion_loss_db", c.mzm.insertion_loss_db},
            {"phase_offset_rad", c.mzm.phase_offset_rad},
            {"phase_per_unit_drive_rad", c.mzm.phase_per_unit_drive_rad}}},
          {"weight_mrr", mrr_json(c.weight_mrr)},
          {"switch_mrr", mrr_json(c.switch_mrr)},
          {"pd", {{"responsivity_nm_a_per_w", resp}, {"dark_current_a", c.pd.dark_current_a}}},
          {"noise", {{"enabled", c.noise.enabled}, {"sigma_rel", c.noise.sigma_rel}, {"seed", c.noise.seed}}}};
}

sim::TileConfig device_from_json(const json& j, const sim::TileConfig& base) {
  sim::TileConfig c = base;
  try {
    reject_unknown_keys(j, {"format", "version", "tile", "mzm", "weight_mrr", "switch_mrr", "pd", "noise"},
                        "device profile");
    if (j.contains("format") && j["format"] != "cirptc-device") throw ConfigError("not a device profile");
    if (j.contains("version") && j["version"] != 1) throw ConfigError("unsupported device profile version");
    if (j.contains("tile")) {
      const json& t = j["tile"];
      reject_unknown_keys(t,
                          {"order", "channels_nm", "plan_fsr_nm", "folds", "weight_branches", "channel_power_w",
                           "weight_headroom", "max_detuning_nm", "weight_bits", "input_bits", "adc_bits",
                           "crosstalk_on", "dark_subtract", "responsivity_compensation"},
                          "tile");
      read(t, "order", c.l);
      const auto cur = c.plan.base_channels();
      std::vector<double> channels(cur.begin(), cur.end());
      double fsr = c.plan.fsr_nm();
      std::size_t folds = c.plan.folds();
      read(t, "channels_nm", channels);
      read(t, "plan_fsr_nm", fsr);
      read(t, "folds", folds);
      c.plan = photonics::WavelengthPlan(channels, fsr, folds);
      if (t.contains("weight_branches")) {
        c.weight_branches.clear();
        for (const auto& b : t["weight_branches"]) c.weight_branches.push_back(parse_branch(b));
      }
      read(t, "channel_power_w", c.channel_power_w);
      read(t, "weight_headroom", c.weight_headroom);
      read(t, "max_detuning_nm", c.max_detuning_nm);
      read(t, "weight_bits", c.weight_quant.bits);
      read(t, "input_bits", c.input_quant.bits);
      read(t, "adc_bits", c.adc_bits);
      read(t, "crosstalk_on", c.crosstalk_on);
      read(t, "dark_subtract", c.dark_subtract);
      read(t, "responsivity_compensation", c.responsivity_compensation);
    }
    if (j.contains("mzm")) {
      const json& m = j["mzm"];
      reject_unknown_keys(m, {"extinction_ratio_db", "insertion_loss_db", "phase_offset_rad", "phase_per_unit_drive_rad"},
                          "mzm");
      read(m, "extinction_ratio_db", c.mzm.extinction_ratio_db);
      read(m, "insertion_loss_db", c.mzm.insertion_loss_db);
      read(m, "phase_offset_rad", c.mzm.phase_offset_rad);
      read(m, "phase_per_unit_drive_rad", c.mzm.phase_per_unit_drive_rad);
    }
    if (j.contains("weight_mrr")) read_mrr(j["weight_mrr"], c.weight_mrr, "weight_mrr");
    if (j.contains("switch_mrr")) read_mrr(j["switch_mrr"], c.switch_mrr, "switch_mrr");
    if (j.contains("pd")) {
      const json& p = j["pd"];
      reject_unknown_keys(p, {"responsivity_nm_a_per_w", "dark_current_a"}, "pd");
      if (p.contains("responsivity_nm_a_per_w")) {
        c.pd.responsivity.clear();
        for (const auto& e : p["responsivity_nm_a_per_w"]) {
          if (!e.is_array() || e.size() != 2) throw ConfigError("responsivity entries are [nm, A/W] pairs");
          c.pd.responsivity.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
      }
      read(p, "dark_current_a", c.pd.dark_current_a);
    }
    if (j.contains("noise")) {
      const json& n = j["noise"];
      reject_unknown_keys(n, {"enabled", "sigma_rel", "seed"}, "noise");
      read(n, "enabled", c.noise.enabled);
      read(n, "sigma_rel", c.noise.sigma_rel);
      read(n, "seed", c.noise.seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("device profile: ") + e.what());
  }
  c.validate();
  return c;
}

sim::TileConfig load_device_profile(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("device profile " + path + ": " + e.what());
  }
  return device_from_json(j);
}

}  // namespace cirptc::io
