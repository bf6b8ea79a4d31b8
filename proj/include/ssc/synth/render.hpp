#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "ssc/core/parallel.hpp"
#include "ssc/encodings/colour.hpp"
#include "ssc/geometry/camera.hpp"
#include "ssc/synth/scene.hpp"

namespace ssc {

struct RayHit {
  double t = 0;
  std::size_t primitive = 0;
};

/// Slab test. Returns the entry parameter t >= 0 of origin + t * dir into the
/// box, 0 when the origin is already inside.
inline std::optional<double> intersect_box(const Vec3& origin, const Vec3& dir, const Box& b) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0) {
      if (origin[a] < b.min[a] || origin[a] > b.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[a] - origin[a]) / dir[a];
    double t1 = (b.max[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_far < t_near || t_far < 0) return std::nullopt;
  return std::max(t_near, 0.0);
}

/// Nearest hit over all primitives; ties go to the later primitive, matching
/// the voxeliser's overlap rule.
inline std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
  std::optional<RayHit> best;
  for (std::size_t k = 0; k < scene.primitives.size(); ++k) {
    const auto t = intersect_box(origin, dir, scene.primitives[k].box);
    if (t && (!best || *t <= best->t)) best = RayHit{*t, k};
  }
  return best;
}

struct RenderedView {
  DepthMap depth;
  RgbImage rgb;
  bool camera_inside_solid = false;
};

inline bool camera_inside(const SceneSpec& scene, const Vec3& p) {
  return std::any_of(scene.primitives.begin(), scene.primitives.end(),
                     [&](const Primitive& q) { return q.box.contains(p); });
}

/// Per-pixel ray cast. The camera-frame ray of pixel (u, v) is
/// ((u - cx) / fx, (v - cy) / fy, 1), so its hit parameter is the depth along
/// the optical axis. Misses and hits at or beyond max_range are invalid and
/// black.
inline RenderedView render_view(const SceneSpec& scene, const CameraIntrinsics& intr,
                                const Pose& pose, double max_range = 10.0) {
  intr.validate();
  RenderedView view{DepthMap(intr.width, intr.height), RgbImage(intr.width, intr.height),
                    camera_inside(scene, pose.translation)};
  parallel_for(intr.height, [&](std::ptrdiff_t v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir = pose.rotate({(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0});
      const auto hit = cast_ray(scene, pose.translation, dir);
      if (!hit || !(hit->t < max_range)) continue;
      const std::size_t i = view.depth.index(u, static_cast<int>(v));
      view.depth.depth[i] = static_cast<float>(hit->t);
      view.depth.valid[i] = hit->t > 0;
      const auto& rgb = scene.primitives[hit->primitive].rgb;
      std::copy(rgb.begin(), rgb.end(), view.rgb.pixel(i));
    }
  });
  return view;
}

}  // namespace ssc
