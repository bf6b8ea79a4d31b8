#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "ssc/networks/graph.hpp"

namespace ssc {

/// Inclusive input-voxel bounds (z, y, x).
struct VoxelBox {
  std::array<std::size_t, 3> lo{0, 0, 0};
  std::array<std::size_t, 3> hi{0, 0, 0};

  std::array<std::size_t, 3> extent() const {
    return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  }
  friend bool operator==(const VoxelBox&, const VoxelBox&) = default;
};

/// Bounding box of the input voxels that can influence one output voxel.
/// Kernels act on each axis independently, so the reachable index set is
/// carried per axis and per layer, mapped back through stride, padding and
/// dilation, clipped to the real (unpadded) input, and unioned where a layer
/// feeds several consumers.
template <typename T>
VoxelBox receptive_field(const NetworkGraph<T>& net, std::array<std::size_t, 3> out_voxel) {
  const auto shapes = net.infer_shapes(net.input_shape());
  const std::size_t n = net.size();
  const Shape& os = shapes.back();
  for (int a = 0; a < 3; ++a)
    if (out_voxel[a] >= os[a + 1]) throw ShapeError("receptive_field: voxel outside output " + shape_str(os));

  // reach[i][a][k]: index k on axis a of layer i's output lies upstream of the voxel
  std::vector<std::array<std::vector<char>, 3>> reach(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) reach[i][a].assign(shapes[i][a + 1], 0);
  for (int a = 0; a < 3; ++a) reach[n - 1][a][out_voxel[a]] = 1;

  for (std::size_t i = n; i-- > 1;) {
    const LayerSpec& l = net.layer(i);
    for (std::size_t src : l.inputs) {
      for (int a = 0; a < 3; ++a) {
        const auto& out = reach[i][a];
        auto& in = reach[src][a];
        const long len = static_cast<long>(in.size());
        for (long o = 0; o < static_cast<long>(out.size()); ++o) {
          if (!out[o]) continue;
          if (l.kind == LayerKind::kConv) {
            const ConvSpec& c = l.conv;
            for (long t = 0; t < c.kernel[a]; ++t) {
              const long k = o * c.stride[a] - c.pad[a] + t * c.dilation[a];
              if (k >= 0 && k < len) in[k] = 1;
            }
          } else if (l.kind == LayerKind::kPool) {
            for (long t = 0; t < l.pool.window[a]; ++t) in[o * l.pool.stride[a] + t] = 1;
          } else {
            in[o] = 1;
          }
        }
      }
    }
  }

  VoxelBox box;
  for (int a = 0; a < 3; ++a) {
    const auto& r = reach[0][a];
    std::size_t lo = r.size(), hi = 0;
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r[k]) {
        lo = std::min(lo, k);
        hi = k;
      }
    if (lo == r.size()) throw ShapeError("receptive_field: output does not depend on the input");
    box.lo[a] = lo;
    box.hi[a] = hi;
  }
  return box;
}

}  // namespace ssc
