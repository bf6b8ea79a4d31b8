#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ssc/core/random.hpp"
#include "ssc/networks/graph.hpp"

namespace ssc {

/// round(base * width), at least 1. Non-positive widths are rejected.
inline int scaled_width(int base, double width) {
  if (!(width > 0) || !std::isfinite(width)) {
    throw ShapeError("network width multiplier must be positive, got " + std::to_string(width));
  }
  return std::max(1, static_cast<int>(std::lround(base * width)));
}

struct TrunkWidths {
  int c1, c2, head;
};

inline TrunkWidths trunk_widths(const NetConfig& cfg) {
  const int c2 = scaled_width(32, cfg.width);
  return {scaled_width(16, cfg.width), c2, 4 * c2};
}

/// Fan-in scaled uniform init, U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), zero
/// bias. Each block draws from a stream keyed by (seed, block name) so a
/// block initialises the same way in every network that contains it.
template <typename T>
void init_block(ParamBlock<T>& b, const std::string& name, std::uint64_t seed) {
  PortableRng rng(seed ^ name_hash(name));
  const std::size_t fan_in = b.weight.size() / b.weight.dim(0);
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (T& w : b.weight.values()) w = static_cast<T>(rng.uniform(-bound, bound));
  b.bias.fill(T{0});
  b.weight_velocity = Tensor<T>();
  b.bias_velocity = Tensor<T>();
}

template <typename T>
void init_params(NetworkGraph<T>& net, std::uint64_t seed) {
  for (auto& [name, b] : net.params()) init_block(b, name, seed);
}

namespace detail {

inline void check_grid(const NetConfig& cfg) {
  const Dims3 g = cfg.grid;
  if (g.d == 0 || g.h == 0 || g.w == 0 || g.d % 4 || g.h % 4 || g.w % 4) {
    throw ShapeError("network grid " + g.str() + " must be non-empty and divisible by 4");
  }
  if (cfg.classes < 2) throw ShapeError("network needs at least 2 classes");
}

// conv -> relu -> conv [+ shortcut] -> relu; returns the final relu.
template <typename T>
std::size_t block(NetworkGraph<T>& net, const std::string& name, std::size_t from, int ch,
                  int dilation, bool residual) {
  const ConvSpec s = ConvSpec::cube(ch, ch, 3, 1, dilation, dilation);
  const std::size_t a = net.relu(name + "a_relu", net.conv(name + "a", from, s));
  std::size_t b = net.conv(name + "b", a, s);
  if (residual) b = net.sum(name + "_add", {b, from});
  return net.relu(name + "_relu", b);
}

// Multi-scale features of the depth trunk: pooled input to the residual
// stage, two plain blocks, two dilated blocks.
template <typename T>
std::vector<std::size_t> depth_trunk(NetworkGraph<T>& net, std::size_t from, int in_ch,
                                     const NetConfig& cfg) {
  const auto w = trunk_widths(cfg);
  std::size_t x = net.relu("conv1_relu", net.conv("conv1", from, ConvSpec::cube(in_ch, w.c1, 5, 2, 2)));
  x = net.relu("conv2_relu", net.conv("conv2", x, ConvSpec::cube(w.c1, w.c2, 3, 1, 1)));
  const std::size_t p = net.pool("pool", x);
  const std::size_t r1 = block(net, "conv3", p, w.c2, 1, cfg.residual);
  const std::size_t r2 = block(net, "conv4", r1, w.c2, 1, cfg.residual);
  const std::size_t d1 = block(net, "conv5", r2, w.c2, 2, cfg.residual);
  const std::size_t d2 = block(net, "conv6", d1, w.c2, 2, cfg.residual);
  return {p, r1, r2, d1, d2};
}

// Colour trunk: the second plain conv and one plain block are dropped; both
// dilated blocks stay.
template <typename T>
std::vector<std::size_t> colour_trunk(NetworkGraph<T>& net, std::size_t from, const NetConfig& cfg) {
  const auto w = trunk_widths(cfg);
  std::size_t x = net.relu("c_conv1_relu", net.conv("c_conv1", from, ConvSpec::cube(3, w.c2, 5, 2, 2)));
  const std::size_t p = net.pool("c_pool", x);
  const std::size_t r1 = block(net, "c_conv3", p, w.c2, 1, cfg.residual);
  const std::size_t d1 = block(net, "c_conv5", r1, w.c2, 2, cfg.residual);
  const std::size_t d2 = block(net, "c_conv6", d1, w.c2, 2, cfg.residual);
  return {p, r1, d1, d2};
}

// Scale concat and the three 1x1x1 head convs.
template <typename T>
void heads(NetworkGraph<T>& net, const std::vector<std::size_t>& scales, const NetConfig& cfg) {
  const auto w = trunk_widths(cfg);
  const std::size_t cat = net.concat("concat", scales);
  const int cat_ch = static_cast<int>(scales.size()) * w.c2;
  std::size_t x = net.relu("head1_relu", net.conv("head1", cat, ConvSpec::cube(cat_ch, w.head, 1)));
  x = net.relu("head2_relu", net.conv("head2", x, ConvSpec::cube(w.head, w.head, 1)));
  net.conv("head3", x, ConvSpec::cube(w.head, cfg.classes, 1));
}

template <typename T>
NetworkGraph<T> start(Variant v, const NetConfig& cfg) {
  check_grid(cfg);
  trunk_widths(cfg);
  NetworkGraph<T> net;
  net.variant = v;
  net.config = cfg;
  net.input("input", input_channels(v));
  return net;
}

}  // namespace detail

/// fTSDF in, class scores at a quarter of the input resolution out.
template <typename T = float>
NetworkGraph<T> build_depth_net(const NetConfig& cfg) {
  auto net = detail::start<T>(Variant::kDepth, cfg);
  detail::heads(net, detail::depth_trunk(net, 0, 1, cfg), cfg);
  init_params(net, cfg.seed);
  return net;
}

/// Depth net whose first conv reads fTSDF + RGB.
template <typename T = float>
NetworkGraph<T> build_early_fusion(const NetConfig& cfg) {
  auto net = detail::start<T>(Variant::kEarly, cfg);
  detail::heads(net, detail::depth_trunk(net, 0, 4, cfg), cfg);
  init_params(net, cfg.seed);
  return net;
}

/// Separate depth and colour trunks over the 4-channel input, joined at the
/// scale concat.
template <typename T = float>
NetworkGraph<T> build_mid_fusion(const NetConfig& cfg) {
  auto net = detail::start<T>(Variant::kMid, cfg);
  const std::size_t d = net.slice("input_depth", 0, 0, 1);
  const std::size_t c = net.slice("input_colour", 0, 1, 4);
  auto scales = detail::depth_trunk(net, d, 1, cfg);
  for (std::size_t s : detail::colour_trunk(net, c, cfg)) scales.push_back(s);
  detail::heads(net, scales, cfg);
  init_params(net, cfg.seed);
  return net;
}

/// Colour trunk and heads, RGB volume in.
template <typename T = float>
NetworkGraph<T> build_colour_only(const NetConfig& cfg) {
  auto net = detail::start<T>(Variant::kColour, cfg);
  detail::heads(net, detail::colour_trunk(net, 0, cfg), cfg);
  init_params(net, cfg.seed);
  return net;
}

template <typename T = float>
NetworkGraph<T> build_network(Variant v, const NetConfig& cfg) {
  switch (v) {
    case Variant::kDepth: return build_depth_net<T>(cfg);
    case Variant::kEarly: return build_early_fusion<T>(cfg);
    case Variant::kMid: return build_mid_fusion<T>(cfg);
    case Variant::kColour: return build_colour_only<T>(cfg);
  }
  throw ShapeError("unknown variant");
}

}  // namespace ssc
