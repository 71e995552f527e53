#include "cirptc/lut.hpp"

#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"
#include "cirptc/full_range.hpp"

namespace cirptc::sim {

using nlohmann::json;

Lut::Lut(std::size_t l, int weight_bits, int input_bits) : l_(l), weight_bits_(weight_bits), input_bits_(input_bits) {
  if (l == 0 || weight_bits < 1 || input_bits < 1 || weight_bits > 16 || input_bits > 16)
    throw ConfigError("Lut: invalid order or bit widths");
}

std::string Lut::key(std::span<const std::uint32_t> w, std::span<const std::uint32_t> x) const {
  if (w.size() != l_ || x.size() != l_) throw DimensionError("Lut: key length differs from the tile order");
  std::string k;
  k.reserve(4 * l_);
  for (auto c : w) k.append({char(c >> 8), char(c & 0xff)});
  for (auto c : x) k.append({char(c >> 8), char(c & 0xff)});
  return k;
}

std::size_t Lut::weight_blocks() const {
  std::set<std::string> w;
  for (const auto& [k, v] : table_) w.insert(k.substr(0, 2 * l_));
  return w.size();
}

std::size_t Lut::input_keys(std::span<const std::uint32_t> weight_codes) const {
  const std::string prefix = key(weight_codes, std::vector<std::uint32_t>(l_, 0)).substr(0, 2 * l_);
  std::size_t n = 0;
  for (auto it = table_.lower_bound(prefix); it != table_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
       ++it)
    ++n;
  return n;
}

void Lut::insert(std::span<const std::uint32_t> w, std::span<const std::uint32_t> x, RealVector y) {
  for (auto c : w)
    if (c >> weight_bits_) throw DomainError("Lut: weight code off the codebook");
  for (auto c : x)
    if (c >> input_bits_) throw DomainError("Lut: input code off the codebook");
  if (y.size() != l_) throw DimensionError("Lut: output length differs from the tile order");
  table_[key(w, x)] = std::move(y);
}

const RealVector& Lut::lookup(std::span<const std::uint32_t> w, std::span<const std::uint32_t> x) const {
  const auto it = table_.find(key(w, x));
  if (it == table_.end()) {
    std::ostringstream os;
    os << "LUT has no entry for weight codes [";
    for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
    os << "] input codes [";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << "]";
    throw LutKeyError(os.str());
  }
  return it->second;
}

bool Lut::contains(std::span<const std::uint32_t> w, std::span<const std::uint32_t> x) const {
  return table_.count(key(w, x)) != 0;
}

std::string Lut::serialize() const {
  std::string out = json{{"format", "cirptc-lut"},
                         {"version", 1},
                         {"order", l_},
                         {"weight_bits", weight_bits_},
                         {"input_bits", input_bits_},
                         {"entries", table_.size()}}
                        .dump() +
                    "\n";
  for (const auto& [k, y] : table_) {
    std::vector<std::uint32_t> w(l_), x(l_);
    for (std::size_t i = 0; i < l_; ++i) {
      w[i] = (std::uint32_t(std::uint8_t(k[2 * i])) << 8) | std::uint8_t(k[2 * i + 1]);
      x[i] = (std::uint32_t(std::uint8_t(k[2 * (l_ + i)])) << 8) | std::uint8_t(k[2 * (l_ + i) + 1]);
    }
    out += json{{"w", w}, {"x", x}, {"y", y}}.dump();
    out += '\n';
  }
  return out;
}

Lut Lut::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(FormatError::Kind::truncated, "LUT file is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::bad_header, std::string("LUT header: ") + e.what());
  }
  if (header.value("format", "") != "cirptc-lut") throw FormatError(FormatError::Kind::bad_magic, "not a LUT file");
  if (header.value("version", 0) != 1) throw FormatError(FormatError::Kind::version, "unsupported LUT version");
  Lut lut(header.at("order").get<std::size_t>(), header.at("weight_bits").get<int>(),
          header.at("input_bits").get<int>());
  const auto expected = header.at("entries").get<std::size_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json e = json::parse(line);
      lut.insert(e.at("w").get<std::vector<std::uint32_t>>(), e.at("x").get<std::vector<std::uint32_t>>(),
                 e.at("y").get<RealVector>());
    } catch (const json::exception& e) {
      throw FormatError(FormatError::Kind::bad_header, std::string("LUT entry: ") + e.what());
    }
  }
  if (lut.size() != expected) throw FormatError(FormatError::Kind::truncated, "LUT entry count mismatch");
  return lut;
}

void Lut::save(const std::string& path) const { io::write_file_atomic(path, serialize()); }

Lut Lut::load(const std::string& path) { return parse(io::read_file(path)); }

std::vector<std::uint32_t> codes_of(std::span<const double> values, const quant::QuantSpec& q) {
  std::vector<std::uint32_t> c(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!quant::on_codebook(values[i], q))
      throw DomainError("value " + std::to_string(values[i]) + " at index " + std::to_string(i) +
                        " is not on the quantization grid");
    c[i] = quant::code(values[i], q);
  }
  return c;
}

Lut build_lut(const TileConfig& cfg, const std::vector<std::vector<double>>& weight_blocks, const LutPolicy& policy) {
  cfg.validate();
  if (cfg.folds() != 1) throw ConfigError("build_lut: tables are built for unfolded tiles");
  const std::size_t l = cfg.l;
  const std::uint64_t levels = cfg.input_quant.levels();
  double combos = 1.0;
  for (std::size_t i = 0; i < l; ++i) combos *= double(levels);
  if (combos > 9e18) throw ConfigError("build_lut: input space too large to index");
  if (policy.kind == LutPolicy::Kind::full && combos > double(1u << 24))
    throw ConfigError("build_lut: full enumeration of " + std::to_string(combos) +
                      " input vectors is too large; use the random policy");
  if (policy.kind == LutPolicy::Kind::random && (policy.samples == 0 || double(policy.samples) > combos))
    throw ConfigError("build_lut: random policy needs 0 < samples <= number of input vectors");

  Lut lut(l, cfg.weight_quant.bits, cfg.input_quant.bits);
  std::vector<std::uint32_t> xc(l);
  RealVector x(l);
  for (std::size_t b = 0; b < weight_blocks.size(); ++b) {
    const auto& wb = weight_blocks[b];
    if (wb.size() != l) throw DimensionError("build_lut: weight block length differs from the tile order");
    const auto wc = codes_of(wb, cfg.weight_quant);
    const ProgrammedTile tile = program_tile(cfg, wb);
    auto emit = [&](std::uint64_t index) {
      std::uint64_t rest = index;
      for (std::size_t i = 0; i < l; ++i) {
        xc[i] = std::uint32_t(rest % levels);
        rest /= levels;
        x[i] = quant::from_code(xc[i], cfg.input_quant);
      }
      lut.insert(wc, xc, run_tile(cfg, tile, x, mix_seed(cfg.noise.seed, b, index)));
    };
    const std::uint64_t total = std::uint64_t(combos);
    if (policy.kind == LutPolicy::Kind::full) {
      for (std::uint64_t i = 0; i < total; ++i) emit(i);
    } else {
      std::mt19937_64 rng(mix_seed(policy.seed, b));
      std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
      std::set<std::uint64_t> chosen;
      while (chosen.size() < policy.samples) chosen.insert(pick(rng));
      for (auto i : chosen) emit(i);
    }
  }
  return lut;
}

}  // namespace cirptc::sim
