#pragma once

#include <cmath>
#include <cstdint>

#include "ssc/core/parallel.hpp"
#include "ssc/core/volume.hpp"
#include "ssc/geometry/camera.hpp"
#include "ssc/geometry/voxel_grid.hpp"

namespace ssc {

enum class Visibility : std::uint8_t {
  kVisibleFree = 0,
  kVisibleSurface = 1,
  kOccluded = 2,
  kOutsideFrustum = 3,
};

using VisibilityVolume = Volume<Visibility>;

// Encoders and masks treat unobserved space like occluded space.
inline bool occluded_like(Visibility v) {
  return v == Visibility::kOccluded || v == Visibility::kOutsideFrustum;
}
inline bool visible_side(Visibility v) { return !occluded_like(v); }

/// Pixel hit by a voxel centre: nearest integer pixel, or -1 if the point is
/// behind the camera or projects outside the image.
inline long pixel_of(const Projection& pr, const CameraIntrinsics& intr) {
  if (!(pr.z > 0)) return -1;
  const double fu = std::floor(pr.u + 0.5), fv = std::floor(pr.v + 0.5);
  if (!(fu >= 0 && fu < intr.width && fv >= 0 && fv < intr.height)) return -1;
  return static_cast<long>(fv) * intr.width + static_cast<long>(fu);
}

/// Classifies a voxel from the camera depth of its centre and the measured
/// depth at the pixel it projects to; the surface band is one voxel either
/// side of the measurement.
inline Visibility classify_voxel(double voxel_depth, double measured, double band) {
  const double diff = voxel_depth - measured;
  if (diff > band) return Visibility::kOccluded;
  if (diff < -band) return Visibility::kVisibleFree;
  return Visibility::kVisibleSurface;
}

inline VisibilityVolume classify_visibility(const DepthMap& depth,
                                            const CameraIntrinsics& intr,
                                            const Pose& pose, const VoxelGrid& grid,
                                            double max_range = kNoMaxRange) {
  intr.validate();
  grid.validate();
  if (depth.width != intr.width || depth.height != intr.height) {
    throw ShapeError("classify_visibility: depth map does not match intrinsics");
  }
  VisibilityVolume vis(grid.dims, Visibility::kOutsideFrustum);
  const double band = grid.voxel_size;
  parallel_for(static_cast<std::ptrdiff_t>(grid.dims.d), [&](std::ptrdiff_t z) {
    for (std::size_t y = 0; y < grid.dims.h; ++y)
      for (std::size_t x = 0; x < grid.dims.w; ++x) {
        const VoxelIndex idx{static_cast<long>(x), static_cast<long>(y), static_cast<long>(z)};
        const Projection pr = project(voxel_to_world(idx, grid), intr, pose);
        const long px = pixel_of(pr, intr);
        if (px < 0) continue;
        const std::size_t p = static_cast<std::size_t>(px);
        if (!depth.usable(p, max_range)) continue;
        vis[grid.linear(idx)] = classify_voxel(pr.z, depth.depth[p], band);
      }
  });
  return vis;
}

}  // namespace ssc
