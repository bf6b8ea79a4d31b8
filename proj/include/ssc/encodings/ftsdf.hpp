#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ssc/core/tensor.hpp"
#include "ssc/geometry/visibility.hpp"

namespace ssc {

inline std::vector<std::size_t> surface_voxels(const VisibilityVolume& vis) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < vis.size(); ++i)
    if (vis[i] == Visibility::kVisibleSurface) out.push_back(i);
  return out;
}

/// Flipped TSDF. Magnitude max(0, 1 - dist / tau), dist being the distance in
/// voxel units to the nearest surface voxel centre; positive on the visible
/// side, negative on occluded or unobserved voxels. An empty surface set
/// yields all zeros.
///
/// Only voxels within tau of a surface voxel can be non-zero, so each surface
/// voxel scatters its squared distance over a (2 ceil(tau) + 1)^3 window. This
/// gives the same integer squared distances as an all-pairs search.
template <typename T = float>
Tensor<T> ftsdf_encode(const VisibilityVolume& vis,
                       const std::vector<std::size_t>& surface, double tau) {
  if (!(tau > 0)) throw DataError("ftsdf: truncation must be positive");
  const Dims3 d = vis.dims;
  Tensor<T> out(Shape{1, d.d, d.h, d.w}, T{0});
  if (surface.empty()) return out;

  const long r = static_cast<long>(std::ceil(tau));
  const double tau2 = tau * tau;
  constexpr long kFar = std::numeric_limits<long>::max();
  std::vector<long> best(d.count(), kFar);
  for (std::size_t s : surface) {
    if (s >= d.count()) throw ShapeError("ftsdf: surface voxel index outside the grid");
    const long sx = static_cast<long>(s % d.w);
    const long sy = static_cast<long>((s / d.w) % d.h);
    const long sz = static_cast<long>(s / (d.w * d.h));
    for (long dz = -r; dz <= r; ++dz) {
      const long z = sz + dz;
      if (z < 0 || z >= static_cast<long>(d.d)) continue;
      for (long dy = -r; dy <= r; ++dy) {
        const long y = sy + dy;
        if (y < 0 || y >= static_cast<long>(d.h)) continue;
        for (long dx = -r; dx <= r; ++dx) {
          const long x = sx + dx;
          if (x < 0 || x >= static_cast<long>(d.w)) continue;
          const long d2 = dz * dz + dy * dy + dx * dx;
          if (static_cast<double>(d2) >= tau2) continue;
          long& b = best[(static_cast<std::size_t>(z) * d.h + y) * d.w + x];
          b = std::min(b, d2);
        }
      }
    }
  }
  for (std::size_t i = 0; i < d.count(); ++i) {
    if (best[i] == kFar) continue;
    const double m = std::max(0.0, 1.0 - std::sqrt(static_cast<double>(best[i])) / tau);
    out[i] = static_cast<T>(visible_side(vis[i]) ? m : -m);
  }
  return out;
}

template <typename T = float>
Tensor<T> ftsdf_encode(const VisibilityVolume& vis, double tau = 4.0) {
  return ftsdf_encode<T>(vis, surface_voxels(vis), tau);
}

}  // namespace ssc
