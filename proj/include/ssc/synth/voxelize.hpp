#pragma once

#include "ssc/core/volume.hpp"
#include "ssc/geometry/voxel_grid.hpp"
#include "ssc/synth/scene.hpp"

namespace ssc {

/// Solid (space-carving) voxelisation: a voxel takes a primitive's label when
/// its centre lies inside or on the box, so interiors are filled, not just
/// shells. Primitives are applied in order, later ones overwriting.
inline LabelVolume voxelize_scene(const SceneSpec& scene, const VoxelGrid& grid) {
  grid.validate();
  LabelVolume labels(grid.dims, 0);
  for (const auto& p : scene.primitives) {
    for (std::size_t z = 0; z < grid.dims.d; ++z)
      for (std::size_t y = 0; y < grid.dims.h; ++y)
        for (std::size_t x = 0; x < grid.dims.w; ++x) {
          const VoxelIndex i{static_cast<long>(x), static_cast<long>(y), static_cast<long>(z)};
          if (p.box.contains(voxel_to_world(i, grid))) labels.at(z, y, x) = p.label;
        }
  }
  return labels;
}

}  // namespace ssc
