#include "cirptc/formats.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "cirptc/errors.hpp"
#include "cirptc/file_util.hpp"

namespace cirptc::io {

using Kind = FormatError::Kind;

std::vector<std::uint8_t> to_gray8(std::span<const double> values, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("to_gray8: empty value range");
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::round(255.0 * (values[i] - lo) / (hi - lo));
    out[i] = std::uint8_t(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

std::string encode_pgm(std::size_t width, std::size_t height, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != width * height) throw DimensionError("encode_pgm: pixel count mismatch");
  std::string s = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  s.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return s;
}

void write_pgm(const std::string& path, std::size_t width, std::size_t height, std::span<const std::uint8_t> pixels) {
  write_file_atomic(path, encode_pgm(width, height, pixels));
}

void write_pgm(const std::string& path, const conv::ImageTensor& img, std::size_t channel, double lo, double hi) {
  if (channel >= img.channels) throw DimensionError("write_pgm: channel out of range");
  const std::size_t m = img.height * img.width;
  write_pgm(path, img.width, img.height,
            to_gray8(std::span<const double>(img.data).subspan(channel * m, m), lo, hi));
}

std::string encode_ppm(const conv::ImageTensor& img) {
  if (img.channels != 3) throw DimensionError("encode_ppm: needs three channels");
  const auto bytes = to_gray8(img.data, 0.0, 1.0);
  std::string s = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  const std::size_t m = img.height * img.width;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t c = 0; c < 3; ++c) s.push_back(char(bytes[c * m + p]));
  return s;
}

conv::ImageTensor parse_pnm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw FormatError(Kind::bad_magic, "not a binary PGM/PPM image");
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    long v = -1;
    if (!(in >> v) || v <= 0) throw FormatError(Kind::bad_header, "bad PNM header field");
    return std::size_t(v);
  };
  const std::size_t w = next_int(), h = next_int(), maxval = next_int();
  if (maxval != 255) throw FormatError(Kind::bad_header, "only 8-bit PNM images are supported");
  in.get();  // single whitespace before the raster
  const std::size_t c = magic == "P5" ? 1 : 3;
  const auto start = std::size_t(in.tellg());
  if (bytes.size() < start + w * h * c) throw FormatError(Kind::truncated, "PNM raster is truncated");
  conv::ImageTensor img(c, h, w);
  for (std::size_t p = 0; p < w * h; ++p)
    for (std::size_t ch = 0; ch < c; ++ch)
      img.data[ch * w * h + p] = double(std::uint8_t(bytes[start + p * c + ch])) / 255.0;
  return img;
}

conv::ImageTensor read_pnm(const std::string& path) { return parse_pnm(read_file(path)); }

namespace {

std::uint32_t be32(const std::string& s, std::size_t at) {
  if (s.size() < at + 4) throw FormatError(Kind::truncated, "IDX header is truncated");
  return (std::uint32_t(std::uint8_t(s[at])) << 24) | (std::uint32_t(std::uint8_t(s[at + 1])) << 16) |
         (std::uint32_t(std::uint8_t(s[at + 2])) << 8) | std::uint32_t(std::uint8_t(s[at + 3]));
}

void put_be32(std::string& s, std::uint32_t v) {
  for (int sh = 24; sh >= 0; sh -= 8) s.push_back(char((v >> sh) & 0xff));
}

}  // namespace

data::Dataset parse_idx(const std::string& images, const std::string& labels, std::size_t classes) {
  if (be32(images, 0) != 0x00000803) throw FormatError(Kind::bad_magic, "IDX image file magic is not 0x00000803");
  if (be32(labels, 0) != 0x00000801) throw FormatError(Kind::bad_magic, "IDX label file magic is not 0x00000801");
  const std::size_t n = be32(images, 4), h = be32(images, 8), w = be32(images, 12);
  if (be32(labels, 4) != n) throw FormatError(Kind::bad_header, "IDX image and label counts differ");
  if (images.size() < 16 + n * h * w) throw FormatError(Kind::truncated, "IDX image data is truncated");
  if (labels.size() < 8 + n) throw FormatError(Kind::truncated, "IDX label data is truncated");
  data::Dataset d;
  d.channels = 1;
  d.height = h;
  d.width = w;
  d.classes = classes;
  d.images.resize(n * h * w);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n * h * w; ++i) d.images[i] = double(std::uint8_t(images[16 + i])) / 255.0;
  for (std::size_t i = 0; i < n; ++i) d.labels[i] = std::uint8_t(labels[8 + i]);
  d.validate();
  return d;
}

data::Dataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t classes) {
  return parse_idx(read_file(images_path), read_file(labels_path), classes);
}

std::string encode_idx_images(const data::Dataset& d) {
  if (d.channels != 1) throw DimensionError("IDX images hold one channel");
  std::string s;
  put_be32(s, 0x00000803);
  put_be32(s, std::uint32_t(d.size()));
  put_be32(s, std::uint32_t(d.height));
  put_be32(s, std::uint32_t(d.width));
  for (auto b : to_gray8(d.images, 0.0, 1.0)) s.push_back(char(b));
  return s;
}

std::string encode_idx_labels(const data::Dataset& d) {
  std::string s;
  put_be32(s, 0x00000801);
  put_be32(s, std::uint32_t(d.size()));
  for (int l : d.labels) s.push_back(char(std::uint8_t(l)));
  return s;
}

data::Dataset parse_cifar(const std::string& bytes) {
  constexpr std::size_t record = 1 + 3072;
  if (bytes.empty()) throw FormatError(Kind::truncated, "CIFAR batch is empty");
  if (bytes.size() % record != 0)
    throw FormatError(Kind::truncated, "CIFAR batch size " + std::to_string(bytes.size()) +
                                           " is not a multiple of the 3073-byte record");
  const std::size_t n = bytes.size() / record;
  data::Dataset d;
  d.channels = 3;
  d.height = d.width = 32;
  d.classes = 10;
  d.images.resize(n * 3072);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = std::uint8_t(bytes[i * record]);
    if (label > 9)
      throw FormatError(Kind::label_out_of_range, "CIFAR record " + std::to_string(i) + " has label " +
                                                      std::to_string(label));
    d.labels[i] = label;
    for (std::size_t p = 0; p < 3072; ++p) d.images[i * 3072 + p] = double(std::uint8_t(bytes[i * record + 1 + p])) / 255.0;
  }
  return d;
}

data::Dataset load_cifar(const std::string& path) { return parse_cifar(read_file(path)); }

std::string encode_cifar(const data::Dataset& d) {
  if (d.channels != 3 || d.height != 32 || d.width != 32) throw DimensionError("CIFAR records are 3 x 32 x 32");
  std::string s;
  const auto px = to_gray8(d.images, 0.0, 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    s.push_back(char(std::uint8_t(d.labels[i])));
    s.append(reinterpret_cast<const char*>(px.data() + i * 3072), 3072);
  }
  return s;
}

namespace {

class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.append(b, sizeof(T));
  }
  void bytes(const std::string& s) { out += s; }
  std::string out;
};

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string r = s_.substr(pos_, n);
    pos_ += n;
    return r;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw FormatError(Kind::truncated, "checkpoint is truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  nn::Model& m = const_cast<nn::Model&>(ck.model);
  Writer w;
  w.bytes("CPTC");
  w.put<std::uint32_t>(kCheckpointVersion);
  const nn::Shape in = m.input_shape();
  w.put<std::uint32_t>(std::uint32_t(in.c));
  w.put<std::uint32_t>(std::uint32_t(in.h));
  w.put<std::uint32_t>(std::uint32_t(in.w));
  w.put<std::uint32_t>(std::uint32_t(m.classes()));
  w.put<std::int32_t>(m.weight_bits);
  w.put<std::int32_t>(m.act_bits);
  w.put<std::uint32_t>(std::uint32_t(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const nn::LayerSpec& s = m.layer(i).spec();
    w.put<std::uint32_t>(std::uint32_t(s.kind));
    w.put<std::uint64_t>(s.in);
    w.put<std::uint64_t>(s.out);
    w.put<std::uint64_t>(s.k);
    w.put<std::uint64_t>(s.order);
    w.put<double>(s.act_hi);
  }
  const auto params = m.params();
  const auto buffers = m.buffers();
  w.put<std::uint32_t>(std::uint32_t(params.size() + buffers.size()));
  auto tensor = [&](std::span<const double> t) {
    w.put<std::uint64_t>(t.size());
    for (double v : t) w.put<double>(v);
  };
  for (const auto& p : params) tensor(p.value);
  for (const auto& b : buffers) tensor(b);
  w.put<std::uint64_t>(ck.gamma.rows());
  if (!ck.gamma.empty() && ck.gamma.rows() != ck.gamma.cols()) throw DimensionError("checkpoint gamma must be square");
  for (double v : ck.gamma.data()) w.put<double>(v);
  w.put<std::uint64_t>(ck.seed);
  w.put<std::uint64_t>(ck.rng_state.size());
  w.bytes(ck.rng_state);
  w.bytes("END!");
  return w.out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || r.bytes(4) != "CPTC") throw FormatError(Kind::bad_magic, "not a checkpoint file");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError(Kind::version, "checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                         std::to_string(kCheckpointVersion) + ")");
  nn::Shape in;
  in.c = r.get<std::uint32_t>();
  in.h = r.get<std::uint32_t>();
  in.w = r.get<std::uint32_t>();
  const std::size_t classes = r.get<std::uint32_t>();
  Checkpoint ck;
  ck.model = nn::Model(in, classes);
  ck.model.weight_bits = r.get<std::int32_t>();
  ck.model.act_bits = r.get<std::int32_t>();
  const auto layers = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < layers; ++i) {
    nn::LayerSpec s;
    const auto kind = r.get<std::uint32_t>();
    if (kind < 1 || kind > 6) throw FormatError(Kind::bad_header, "unknown layer kind " + std::to_string(kind));
    s.kind = nn::LayerKind(kind);
    s.in = r.get<std::uint64_t>();
    s.out = r.get<std::uint64_t>();
    s.k = r.get<std::uint64_t>();
    s.order = r.get<std::uint64_t>();
    s.act_hi = r.get<double>();
    if (s.order == 0 || s.in > (1u << 24) || s.out > (1u << 24) || s.k > 64)
      throw FormatError(Kind::bad_header, "implausible layer dimensions");
    ck.model.add(s);
  }
  try {
    ck.model.check();
  } catch (const Error& e) {
    throw FormatError(Kind::bad_header, std::string("checkpoint layer chain: ") + e.what());
  }
  auto params = ck.model.params();
  auto buffers = ck.model.buffers();
  const auto tensors = r.get<std::uint32_t>();
  if (tensors != params.size() + buffers.size()) throw FormatError(Kind::bad_header, "checkpoint tensor count mismatch");
  auto tensor = [&](std::span<double> t) {
    if (r.get<std::uint64_t>() != t.size()) throw FormatError(Kind::bad_header, "checkpoint tensor size mismatch");
    for (auto& v : t) v = r.get<double>();
  };
  for (auto& p : params) tensor(p.value);
  for (auto& b : buffers) tensor(b);
  const auto gn = r.get<std::uint64_t>();
  if (gn > 4096) throw FormatError(Kind::bad_header, "implausible crosstalk operator size");
  if (gn > 0) {
    ck.gamma = DenseMatrix(gn, gn);
    for (auto& v : ck.gamma.data()) v = r.get<double>();
  }
  ck.seed = r.get<std::uint64_t>();
  const auto rl = r.get<std::uint64_t>();
  ck.rng_state = r.bytes(rl);
  if (r.bytes(4) != "END!" || !r.done()) throw FormatError(Kind::bad_header, "checkpoint trailer missing");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) { write_file_atomic(path, serialize_checkpoint(ck)); }

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

}  // namespace cirptc::io
