#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ssc/core/random.hpp"
#include "ssc/core/volume.hpp"
#include "ssc/encodings/colour.hpp"
#include "ssc/geometry/camera.hpp"
#include "ssc/geometry/visibility.hpp"
#include "ssc/geometry/voxel_grid.hpp"
#include "ssc/synth/label_set.hpp"
#include "ssc/synth/render.hpp"
#include "ssc/synth/scene.hpp"
#include "ssc/synth/voxelize.hpp"

namespace ssc {

struct Sample {
  std::string id;
  SceneSpec scene;
  Pose pose;
  RgbImage rgb;
  DepthMap depth;
  LabelVolume labels;
  VisibilityVolume visibility;
};

struct SynthOptions {
  double max_range = 10.0;
  int min_objects = 1;
  int max_objects = 4;
};

/// Desk-scale default camera: 160 x 120, 120 px focal length.
inline CameraIntrinsics default_intrinsics() { return {120.0, 120.0, 79.5, 59.5, 160, 120}; }

/// 64 x 32 x 64 voxels of 6 cm, floor at the bottom of the grid.
inline VoxelGrid default_grid() { return {{-1.92, -0.92, 0.5}, 0.06, {64, 32, 64}}; }

namespace detail {

class SceneRng : public PortableRng {
 public:
  using PortableRng::PortableRng;
  std::array<std::uint8_t, 3> jitter(std::array<int, 3> base, int amount) {
    std::array<std::uint8_t, 3> c{};
    for (int k = 0; k < 3; ++k)
      c[k] = static_cast<std::uint8_t>(std::clamp(base[k] + integer(-amount, amount), 0, 255));
    return c;
  }
};

inline std::array<int, 3> class_colour(std::uint16_t label) {
  static const std::array<std::array<int, 3>, 12> palette{{
      {0, 0, 0},       {230, 230, 230}, {150, 110, 70},  {200, 195, 180},
      {120, 170, 220}, {200, 60, 50},   {90, 70, 150},   {60, 140, 80},
      {180, 140, 40},  {40, 40, 40},    {120, 80, 50},   {230, 150, 190}}};
  return palette[label % palette.size()];
}

inline double snap(double v, double origin, double step) {
  return origin + std::round((v - origin) / step) * step;
}

}  // namespace detail

/// One randomised room: floor, back wall, a side wall and furniture boxes
/// resting on the floor. Structural slabs are aligned to 4-voxel blocks so
/// they survive 4x label downsampling.
inline Sample make_room(std::uint64_t seed, const VoxelGrid& grid, const CameraIntrinsics& intr,
                        const LabelSet& labels, const SynthOptions& opt = {}) {
  detail::SceneRng rng(seed);
  const double vs = grid.voxel_size;
  const double block = 4 * vs;
  const double x0 = grid.origin[0], x1 = x0 + grid.dims.w * vs;
  const double y0 = grid.origin[1], y1 = y0 + grid.dims.h * vs;
  const double z0 = grid.origin[2], z1 = z0 + grid.dims.d * vs;
  const double T = kSlabThickness;
  const double floor_y = y1 - block;
  const double back_z = z1 - block;

  Sample s;
  s.id = "room_" + std::to_string(seed);
  s.scene.add({{x0 - T, floor_y, z0 - 2.0}, {x1 + T, y1 + T, z1 + T}}, labels.index("floor"),
              rng.jitter(detail::class_colour(labels.index("floor")), 20));
  s.scene.add({{x0 - T, y0 - T, back_z}, {x1 + T, floor_y, z1 + T}}, labels.index("wall"),
              rng.jitter(detail::class_colour(labels.index("wall")), 20));
  const bool left = rng.integer(0, 1) == 0;
  const Box side = left ? Box{{x0 - T, y0 - T, z0 - 2.0}, {x0 + block, floor_y, back_z}}
                        : Box{{x1 - block, y0 - T, z0 - 2.0}, {x1 + T, floor_y, back_z}};
  s.scene.add(side, labels.index("wall"), rng.jitter(detail::class_colour(labels.index("wall")), 20));

  // Furniture classes: everything after "window".
  const int first_object = std::min<int>(5, static_cast<int>(labels.size()) - 1);
  const int objects = rng.integer(opt.min_objects, opt.max_objects);
  const double inner_x0 = left ? x0 + block : x0, inner_x1 = left ? x1 : x1 - block;
  for (int k = 0; k < objects; ++k) {
    const double sx = detail::snap(rng.uniform(0.36, 1.0), 0, vs);
    const double sz = detail::snap(rng.uniform(0.36, 1.0), 0, vs);
    const double sy = detail::snap(rng.uniform(0.36, 1.0), 0, vs);
    const double px = detail::snap(rng.uniform(inner_x0 + 0.1, std::max(inner_x0 + 0.1, inner_x1 - 0.1 - sx)), x0, vs);
    const double pz = detail::snap(rng.uniform(z0 + 0.4 * (z1 - z0), std::max(z0 + 0.4 * (z1 - z0), back_z - 0.1 - sz)), z0, vs);
    const auto label = static_cast<std::uint16_t>(rng.integer(first_object, static_cast<int>(labels.size()) - 1));
    s.scene.add({{px, floor_y - sy, pz}, {px + sx, floor_y, pz + sz}}, label,
                rng.jitter(detail::class_colour(label), 25));
  }

  const double cam_height = rng.uniform(0.9, 1.2);
  const Vec3 cam{0.5 * (x0 + x1) + rng.uniform(-0.2, 0.2), floor_y - cam_height, z0 - 0.3};
  s.pose = Pose::pitched(rng.uniform(0.25, 0.4), cam);

  const RenderedView view = render_view(s.scene, intr, s.pose, opt.max_range);
  s.rgb = view.rgb;
  s.depth = view.depth;
  s.labels = voxelize_scene(s.scene, grid);
  s.visibility = classify_visibility(s.depth, intr, s.pose, grid, opt.max_range);
  return s;
}

/// Deterministic in seed: sample k is make_room(seed * 1000003 + k).
inline std::vector<Sample> make_dataset(std::uint64_t seed, std::size_t count,
                                        const VoxelGrid& grid, const CameraIntrinsics& intr,
                                        const LabelSet& labels = {}, const SynthOptions& opt = {}) {
  if (count == 0) throw DataError("make_dataset: count must be at least 1");
  grid.validate();
  intr.validate();
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Sample s = make_room(seed * 1000003ull + k, grid, intr, labels, opt);
    s.id = "sample_" + std::to_string(k);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ssc
