#pragma once

#include <cstdint>
#include <vector>

#include "ssc/core/tensor.hpp"
#include "ssc/geometry/camera.hpp"
#include "ssc/geometry/visibility.hpp"
#include "ssc/geometry/voxel_grid.hpp"

namespace ssc {

/// 8-bit interleaved RGB.
struct RgbImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t* pixel(std::size_t i) { return data.data() + 3 * i; }
  const std::uint8_t* pixel(std::size_t i) const { return data.data() + 3 * i; }
};

template <typename T>
struct ColourEncoding {
  Tensor<T> volume;               // 3 x D x H x W
  std::size_t empty_surface = 0;  // surface voxels no pixel landed in
};

/// Each VisibleSurface voxel gets the mean RGB / 255 of the valid pixels whose
/// back-projected points fall inside it; all other voxels are (-1, -1, -1).
/// Channel sums are integers, so the mean does not depend on pixel order.
template <typename T = float>
ColourEncoding<T> colour_encode(const RgbImage& rgb, const DepthMap& depth,
                                const CameraIntrinsics& intr, const Pose& pose,
                                const VoxelGrid& grid, const VisibilityVolume& vis,
                                double max_range = kNoMaxRange) {
  if (rgb.width != depth.width || rgb.height != depth.height) {
    throw ShapeError("colour_encode: rgb and depth sizes differ");
  }
  if (!(vis.dims == grid.dims)) throw ShapeError("colour_encode: visibility grid mismatch");
  const std::size_t n = grid.dims.count();
  std::vector<std::uint64_t> sums(3 * n, 0);
  std::vector<std::uint32_t> counts(n, 0);
  const PointCloud cloud = backproject(depth, intr, pose, max_range);
  for (std::size_t k = 0; k < cloud.points.size(); ++k) {
    const auto idx = world_to_voxel(cloud.points[k], grid);
    if (!idx) continue;
    const std::size_t v = grid.linear(*idx);
    if (vis[v] != Visibility::kVisibleSurface) continue;
    const std::uint8_t* px = rgb.pixel(cloud.pixels[k]);
    for (int c = 0; c < 3; ++c) sums[c * n + v] += px[c];
    ++counts[v];
  }
  ColourEncoding<T> enc{Tensor<T>(Shape{3, grid.dims.d, grid.dims.h, grid.dims.w}, T{-1}), 0};
  for (std::size_t v = 0; v < n; ++v) {
    if (vis[v] != Visibility::kVisibleSurface) continue;
    if (counts[v] == 0) {
      ++enc.empty_surface;
      continue;
    }
    const double denom = 255.0 * counts[v];
    for (int c = 0; c < 3; ++c)
      enc.volume[c * n + v] = static_cast<T>(static_cast<double>(sums[c * n + v]) / denom);
  }
  return enc;
}

}  // namespace ssc
