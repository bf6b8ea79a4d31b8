#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ssc/core/random.hpp"
#include "ssc/networks/graph.hpp"

namespace ssc {

inline constexpr const char* kFirstLayer = "conv1";

/// Splices a trained depth net into an early-fusion net: the first conv's
/// input-channel 0 kernels and its bias come from the donor, the three colour
/// channels are drawn fresh from `seed`, and every deeper block is copied.
template <typename T>
void surgery_init(NetworkGraph<T>& net, const NetworkGraph<T>& donor, std::uint64_t seed) {
  if (net.variant != Variant::kEarly) {
    throw ShapeError(std::string("surgery needs an early-fusion network, got ") +
                     variant_name(net.variant));
  }
  if (donor.variant != Variant::kDepth) {
    throw ShapeError(std::string("surgery donor must be a depth network, got ") +
                     variant_name(donor.variant));
  }
  // Check everything before touching any parameter.
  for (const auto& [name, b] : net.params()) {
    const auto it = donor.params().find(name);
    if (it == donor.params().end()) throw ShapeError("surgery: donor lacks block '" + name + "'");
    const Shape& ws = b.weight.shape();
    const Shape& ds = it->second.weight.shape();
    const bool first = name == kFirstLayer;
    const bool ok = first ? ds.size() == 5 && ds[1] == 1 && ws[1] == 4 && ds[0] == ws[0] &&
                                std::equal(ds.begin() + 2, ds.end(), ws.begin() + 2)
                          : ds == ws;
    if (!ok) {
      throw ShapeError("surgery: block '" + name + "' donor " + shape_str(ds) + " vs " +
                       shape_str(ws));
    }
  }
  for (auto& [name, b] : net.params()) {
    const ParamBlock<T>& d = donor.params().at(name);
    b.bias = d.bias;
    b.weight_velocity = Tensor<T>();
    b.bias_velocity = Tensor<T>();
    if (name != kFirstLayer) {
      b.weight = d.weight;
      continue;
    }
    const std::size_t cout = b.weight.dim(0), cin = b.weight.dim(1);
    const std::size_t taps = b.weight.size() / (cout * cin);
    const double bound = std::sqrt(6.0 / static_cast<double>(cin * taps));
    PortableRng rng(seed ^ name_hash("surgery"));
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t ci = 0; ci < cin; ++ci)
        for (std::size_t t = 0; t < taps; ++t)
          b.weight[(co * cin + ci) * taps + t] =
              ci == 0 ? d.weight[co * taps + t] : static_cast<T>(rng.uniform(-bound, bound));
  }
}

/// Zeroes the first-layer kernels that read the colour channels.
template <typename T>
void zero_colour_slices(NetworkGraph<T>& net) {
  auto& w = net.block(kFirstLayer).weight;
  const std::size_t cout = w.dim(0), cin = w.dim(1);
  const std::size_t taps = w.size() / (cout * cin);
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t ci = 1; ci < cin; ++ci)
      std::fill_n(w.data() + (co * cin + ci) * taps, taps, T{0});
}

}  // namespace ssc
