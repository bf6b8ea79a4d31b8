#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>

#include "ssc/core/volume.hpp"
#include "ssc/geometry/voxel_grid.hpp"

namespace ssc {

/// Fixed display colour per class; free space is never written.
inline std::array<std::uint8_t, 3> ply_colour(std::uint16_t label) {
  static const std::array<std::array<std::uint8_t, 3>, 12> palette{{
      {0, 0, 0},       {214, 214, 214}, {152, 223, 138}, {31, 119, 180}, {255, 187, 120}, {188, 189, 34},
      {140, 86, 75},   {255, 152, 150}, {214, 39, 40},   {197, 176, 213}, {148, 103, 189}, {196, 156, 148}}};
  return palette[label % palette.size()];
}

inline std::size_t occupied_count(const LabelVolume& labels) {
  std::size_t n = 0;
  for (auto l : labels.data) n += l != 0;
  return n;
}

/// ASCII PLY 1.0: one vertex per occupied voxel at its centre in world
/// coordinates, coloured by class.
inline void write_ply(std::ostream& os, const LabelVolume& labels, const VoxelGrid& grid) {
  if (!(labels.dims == grid.dims)) {
    throw ShapeError("write_ply: labels " + labels.dims.str() + " vs grid " + grid.dims.str());
  }
  os << "ply\nformat ascii 1.0\nelement vertex " << occupied_count(labels)
     << "\nproperty float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "property ushort label\nend_header\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    const Vec3 p = voxel_to_world(grid.unlinear(i), grid);
    const auto c = ply_colour(labels[i]);
    os << static_cast<float>(p[0]) << ' ' << static_cast<float>(p[1]) << ' ' << static_cast<float>(p[2]) << ' '
       << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]) << ' ' << labels[i] << '\n';
  }
}

inline void save_ply(const std::string& path, const LabelVolume& labels, const VoxelGrid& grid) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  write_ply(os, labels, grid);
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace ssc
