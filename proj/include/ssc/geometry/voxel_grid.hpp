#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "ssc/core/volume.hpp"
#include "ssc/geometry/camera.hpp"

namespace ssc {

struct VoxelIndex {
  long x = 0, y = 0, z = 0;
  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

/// World-anchored regular lattice. Tensor axes (D, H, W) run along world
/// (z, y, x); origin is the outer corner of voxel (0, 0, 0).
struct VoxelGrid {
  Vec3 origin{0, 0, 0};
  double voxel_size = 0.06;
  Dims3 dims{64, 32, 64};

  void validate() const {
    if (!(voxel_size > 0)) throw DataError("voxel grid: voxel_size must be positive");
    if (dims.d < 1 || dims.h < 1 || dims.w < 1) throw DataError("voxel grid: empty dims");
  }

  bool contains(const VoxelIndex& i) const {
    return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < static_cast<long>(dims.w) &&
           i.y < static_cast<long>(dims.h) && i.z < static_cast<long>(dims.d);
  }
  std::size_t linear(const VoxelIndex& i) const {
    return dims.index(static_cast<std::size_t>(i.z), static_cast<std::size_t>(i.y),
                      static_cast<std::size_t>(i.x));
  }
  VoxelIndex unlinear(std::size_t k) const {
    const long x = static_cast<long>(k % dims.w);
    const long y = static_cast<long>((k / dims.w) % dims.h);
    const long z = static_cast<long>(k / (dims.w * dims.h));
    return {x, y, z};
  }

  /// Same extent, `factor` times coarser. Dims must divide evenly.
  VoxelGrid coarsened(std::size_t factor) const {
    if (factor == 0 || dims.d % factor || dims.h % factor || dims.w % factor) {
      throw ShapeError("voxel grid " + dims.str() + " not divisible by " +
                       std::to_string(factor));
    }
    return {origin, voxel_size * static_cast<double>(factor),
            {dims.d / factor, dims.h / factor, dims.w / factor}};
  }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;
};

/// floor((p - origin) / voxel_size); nullopt outside the grid (never clamped).
inline std::optional<VoxelIndex> world_to_voxel(const Vec3& p, const VoxelGrid& g) {
  const VoxelIndex i{static_cast<long>(std::floor((p[0] - g.origin[0]) / g.voxel_size)),
                     static_cast<long>(std::floor((p[1] - g.origin[1]) / g.voxel_size)),
                     static_cast<long>(std::floor((p[2] - g.origin[2]) / g.voxel_size))};
  if (!g.contains(i)) return std::nullopt;
  return i;
}

inline Vec3 voxel_to_world(const VoxelIndex& i, const VoxelGrid& g) {
  return {g.origin[0] + (static_cast<double>(i.x) + 0.5) * g.voxel_size,
          g.origin[1] + (static_cast<double>(i.y) + 0.5) * g.voxel_size,
          g.origin[2] + (static_cast<double>(i.z) + 0.5) * g.voxel_size};
}

}  // namespace ssc
