#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ssc/core/error.hpp"

namespace ssc {

// Voxel counts along (depth/z, height/y, width/x).
struct Dims3 {
  std::size_t d = 1, h = 1, w = 1;

  std::size_t count() const { return d * h * w; }
  std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * h + y) * w + x;
  }
  std::string str() const {
    return std::to_string(d) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

/// Per-voxel integral values (labels, visibility classes, masks).
template <typename V>
struct Volume {
  Dims3 dims;
  std::vector<V> data;

  Volume() = default;
  explicit Volume(Dims3 d, V fill = V{}) : dims(d), data(d.count(), fill) {}

  std::size_t size() const { return data.size(); }
  V& operator[](std::size_t i) { return data[i]; }
  const V& operator[](std::size_t i) const { return data[i]; }
  V& at(std::size_t z, std::size_t y, std::size_t x) { return data[dims.index(z, y, x)]; }
  const V& at(std::size_t z, std::size_t y, std::size_t x) const {
    return data[dims.index(z, y, x)];
  }
  friend bool operator==(const Volume&, const Volume&) = default;
};

using LabelVolume = Volume<std::uint16_t>;
using MaskVolume = Volume<std::uint8_t>;

template <typename A, typename B>
void require_same_dims(const Volume<A>& a, const Volume<B>& b, const char* what) {
  if (!(a.dims == b.dims)) {
    throw ShapeError(std::string(what) + ": grid mismatch " + a.dims.str() +
                     " vs " + b.dims.str());
  }
}

}  // namespace ssc
