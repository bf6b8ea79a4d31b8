#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ssc/core/vxt_io.hpp"
#include "ssc/networks/graph.hpp"

// SSCM1 model file, little-endian:
//   "SSCM1"  u32 version  u32 n + n bytes of key=value text (config and layers)
//   u32 block count, then per conv block in layer order:
//   u32 n + name, u8 trainable, f64 lr ratio, VXT1 weight, VXT1 bias

namespace ssc {

namespace sscm {

inline constexpr char kMagic[5] = {'S', 'S', 'C', 'M', '1'};
inline constexpr std::uint32_t kVersion = 1;

inline std::string triple(const Triple& t) {
  return std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]);
}

inline Triple parse_triple(const std::string& s) {
  Triple t{};
  char c1 = 0, c2 = 0;
  std::istringstream ss(s);
  if (!(ss >> t[0] >> c1 >> t[1] >> c2 >> t[2]) || c1 != ',' || c2 != ',') {
    throw DataError("SSCM1: bad triple '" + s + "'");
  }
  return t;
}

template <typename T>
std::string describe(const NetworkGraph<T>& net) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  const NetConfig& c = net.config;
  os << "variant=" << variant_name(net.variant) << '\n'
     << "grid=" << c.grid.d << 'x' << c.grid.h << 'x' << c.grid.w << '\n'
     << "classes=" << c.classes << '\n'
     << "width=" << c.width << '\n'
     << "residual=" << (c.residual ? 1 : 0) << '\n'
     << "seed=" << c.seed << '\n';
  for (const LayerSpec& l : net.layers()) {
    os << "layer=" << l.name << ' ' << kind_name(l.kind);
    if (!l.inputs.empty()) {
      os << " from=";
      for (std::size_t k = 0; k < l.inputs.size(); ++k)
        os << (k ? "," : "") << net.layer(l.inputs[k]).name;
    }
    switch (l.kind) {
      case LayerKind::kInput:
        os << " channels=" << l.end;
        break;
      case LayerKind::kConv:
        os << " cin=" << l.conv.in_channels << " cout=" << l.conv.out_channels
           << " k=" << triple(l.conv.kernel) << " s=" << triple(l.conv.stride)
           << " p=" << triple(l.conv.pad) << " d=" << triple(l.conv.dilation);
        break;
      case LayerKind::kPool:
        os << " w=" << triple(l.pool.window) << " s=" << triple(l.pool.stride);
        break;
      case LayerKind::kSlice:
        os << " begin=" << l.begin << " end=" << l.end;
        break;
      default:
        break;
    }
    os << '\n';
  }
  return os.str();
}

template <typename T>
NetworkGraph<T> rebuild(const std::string& text) {
  NetworkGraph<T> net;
  std::istringstream is(text);
  std::string line;
  bool have_variant = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("SSCM1: config line without '=': " + line);
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "variant") {
        net.variant = parse_variant(value);
        have_variant = true;
      } else if (key == "grid") {
        std::size_t d, h, w;
        char x1, x2;
        std::istringstream ss(value);
        if (!(ss >> d >> x1 >> h >> x2 >> w) || x1 != 'x' || x2 != 'x') throw DataError("bad grid");
        net.config.grid = {d, h, w};
      } else if (key == "classes") {
        net.config.classes = std::stoi(value);
      } else if (key == "width") {
        net.config.width = std::stod(value);
      } else if (key == "residual") {
        net.config.residual = value == "1";
      } else if (key == "seed") {
        net.config.seed = std::stoull(value);
      } else if (key == "layer") {
        std::istringstream ss(value);
        LayerSpec l;
        std::string kind, field;
        ss >> l.name >> kind;
        l.kind = parse_kind(kind);
        while (ss >> field) {
          const auto e = field.find('=');
          if (e == std::string::npos) throw DataError("bad layer field '" + field + "'");
          const std::string k = field.substr(0, e), v = field.substr(e + 1);
          if (k == "from") {
            std::istringstream names(v);
            std::string name;
            while (std::getline(names, name, ',')) {
              const auto idx = net.find(name);
              if (!idx) throw DataError("layer '" + l.name + "' reads unknown layer '" + name + "'");
              l.inputs.push_back(*idx);
            }
          } else if (k == "channels" || k == "end") {
            l.end = std::stoul(v);
          } else if (k == "begin") {
            l.begin = std::stoul(v);
          } else if (k == "cin") {
            l.conv.in_channels = std::stoi(v);
          } else if (k == "cout") {
            l.conv.out_channels = std::stoi(v);
          } else if (k == "k") {
            l.conv.kernel = parse_triple(v);
          } else if (k == "s") {
            (l.kind == LayerKind::kPool ? l.pool.stride : l.conv.stride) = parse_triple(v);
          } else if (k == "p") {
            l.conv.pad = parse_triple(v);
          } else if (k == "d") {
            l.conv.dilation = parse_triple(v);
          } else if (k == "w") {
            l.pool.window = parse_triple(v);
          } else {
            throw DataError("unknown layer field '" + k + "'");
          }
        }
        net.add(std::move(l));
      } else {
        throw DataError("unknown key '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      throw DataError("SSCM1: config line '" + line + "': " + e.what());
    }
  }
  if (!have_variant) throw DataError("SSCM1: config names no variant");
  return net;
}

inline void put_string(std::ostream& os, const std::string& s) {
  vxt::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is, std::uint32_t limit) {
  const auto n = vxt::get_le<std::uint32_t>(is);
  if (n > limit) throw DataError("SSCM1: string length " + std::to_string(n) + " too large");
  std::string s(n, '\0');
  if (!is.read(s.data(), n)) throw DataError("SSCM1: truncated string");
  return s;
}

}  // namespace sscm

template <typename T>
void write_model(std::ostream& os, const NetworkGraph<T>& net) {
  os.write(sscm::kMagic, sizeof sscm::kMagic);
  vxt::put_le<std::uint32_t>(os, sscm::kVersion);
  sscm::put_string(os, sscm::describe(net));
  const auto convs = net.conv_layers();
  vxt::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(convs.size()));
  for (const auto& name : convs) {
    const ParamBlock<T>& b = net.block(name);
    sscm::put_string(os, name);
    vxt::put_le<std::uint8_t>(os, b.trainable ? 1 : 0);
    vxt::put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(b.lr_ratio));
    write_vxt(os, b.weight);
    write_vxt(os, b.bias);
  }
  if (!os) throw DataError("SSCM1: write failed");
}

template <typename T = float>
NetworkGraph<T> read_model(std::istream& is) {
  char magic[sizeof sscm::kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, sscm::kMagic, sizeof magic) != 0) {
    throw DataError("SSCM1: bad magic");
  }
  const auto version = vxt::get_le<std::uint32_t>(is);
  if (version != sscm::kVersion) throw DataError("SSCM1: unsupported version " + std::to_string(version));
  NetworkGraph<T> net = sscm::rebuild<T>(sscm::get_string(is, 1u << 24));
  const auto convs = net.conv_layers();
  const auto count = vxt::get_le<std::uint32_t>(is);
  if (count != convs.size()) {
    throw DataError("SSCM1: " + std::to_string(count) + " parameter blocks for " +
                    std::to_string(convs.size()) + " conv layers");
  }
  for (const auto& expected : convs) {
    const std::string name = sscm::get_string(is, 4096);
    if (name != expected) throw DataError("SSCM1: block '" + name + "' where '" + expected + "' expected");
    ParamBlock<T>& b = net.block(name);
    b.trainable = vxt::get_le<std::uint8_t>(is) != 0;
    b.lr_ratio = std::bit_cast<double>(vxt::get_le<std::uint64_t>(is));
    Tensor<T> w = read_vxt<T>(is), bias = read_vxt<T>(is);
    if (w.shape() != b.weight.shape() || bias.shape() != b.bias.shape()) {
      throw DataError("SSCM1: block '" + name + "' has shape " + shape_str(w.shape()) +
                      ", layer expects " + shape_str(b.weight.shape()));
    }
    b.weight = std::move(w);
    b.bias = std::move(bias);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw DataError("SSCM1: trailing bytes");
  try {
    net.validate();
    net.output_shape();
  } catch (const ShapeError& e) {
    throw DataError(std::string("SSCM1: inconsistent graph: ") + e.what());
  }
  return net;
}

template <typename T>
void save_model(const std::string& path, const NetworkGraph<T>& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  write_model(os, net);
}

template <typename T = float>
NetworkGraph<T> load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open model " + path);
  try {
    return read_model<T>(is);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace ssc
