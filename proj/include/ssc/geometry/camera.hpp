#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ssc/core/error.hpp"

namespace ssc {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0)) throw DataError("intrinsics: focal lengths must be positive");
    if (width < 1 || height < 1) throw DataError("intrinsics: image size must be positive");
    if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height)) {
      throw DataError("intrinsics: principal point outside the image");
    }
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

/// Rigid camera-to-world transform. rotation is row-major 3x3.
struct Pose {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation{0, 0, 0};

  static Pose identity() { return {}; }

  // Camera pitched about its x axis by `angle` radians (positive looks
  // toward +y, i.e. down in the y-down convention), placed at `position`.
  static Pose pitched(double angle, Vec3 position) {
    const double c = std::cos(angle), s = std::sin(angle);
    Pose p;
    p.rotation = {1, 0, 0, 0, c, s, 0, -s, c};
    p.translation = position;
    return p;
  }

  void validate(double tol = 1e-6) const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += rotation[k * 3 + i] * rotation[k * 3 + j];
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > tol) {
          throw DataError("pose: rotation is not orthonormal");
        }
      }
  }

  Vec3 to_world(const Vec3& c) const {
    const auto& r = rotation;
    return {r[0] * c[0] + r[1] * c[1] + r[2] * c[2] + translation[0],
            r[3] * c[0] + r[4] * c[1] + r[5] * c[2] + translation[1],
            r[6] * c[0] + r[7] * c[1] + r[8] * c[2] + translation[2]};
  }
  Vec3 rotate(const Vec3& c) const {
    const auto& r = rotation;
    return {r[0] * c[0] + r[1] * c[1] + r[2] * c[2],
            r[3] * c[0] + r[4] * c[1] + r[5] * c[2],
            r[6] * c[0] + r[7] * c[1] + r[8] * c[2]};
  }
  Vec3 to_camera(const Vec3& w) const {
    const Vec3 d = w - translation;
    const auto& r = rotation;
    return {r[0] * d[0] + r[3] * d[1] + r[6] * d[2],
            r[1] * d[0] + r[4] * d[1] + r[7] * d[2],
            r[2] * d[0] + r[5] * d[1] + r[8] * d[2]};
  }
};

/// Depth in meters along the optical axis; valid == 0 marks a missing
/// measurement.
struct DepthMap {
  int width = 0, height = 0;
  std::vector<float> depth;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.f),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool usable(std::size_t i, double max_range) const {
    return valid[i] && depth[i] > 0 && depth[i] < max_range;
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::size_t> pixels;  // source pixel v * width + u
};

inline constexpr double kNoMaxRange = std::numeric_limits<double>::infinity();

/// Camera-frame point ((u - cx) z / fx, (v - cy) z / fy, z), mapped to world.
inline PointCloud backproject(const DepthMap& depth, const CameraIntrinsics& intr,
                              const Pose& pose, double max_range = kNoMaxRange) {
  intr.validate();
  if (depth.width != intr.width || depth.height != intr.height) {
    throw ShapeError("backproject: depth map " + std::to_string(depth.width) + "x" +
                     std::to_string(depth.height) + " vs intrinsics " +
                     std::to_string(intr.width) + "x" + std::to_string(intr.height));
  }
  PointCloud cloud;
  for (int v = 0; v < depth.height; ++v)
    for (int u = 0; u < depth.width; ++u) {
      const std::size_t i = depth.index(u, v);
      if (!depth.usable(i, max_range)) continue;
      const double z = depth.depth[i];
      cloud.points.push_back(
          pose.to_world({(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z}));
      cloud.pixels.push_back(i);
    }
  return cloud;
}

struct Projection {
  double u = 0, v = 0, z = 0;  // continuous pixel coordinates, camera depth
};

inline Projection project(const Vec3& world, const CameraIntrinsics& intr, const Pose& pose) {
  const Vec3 c = pose.to_camera(world);
  return {intr.fx * c[0] / c[2] + intr.cx, intr.fy * c[1] / c[2] + intr.cy, c[2]};
}

}  // namespace ssc
