#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ssc/core/volume.hpp"
#include "ssc/geometry/visibility.hpp"

namespace ssc {

namespace detail {

inline Dims3 coarse_dims(const Dims3& d, std::size_t f, const char* what) {
  if (f == 0 || d.d % f || d.h % f || d.w % f) {
    throw ShapeError(std::string(what) + ": grid " + d.str() + " not divisible by " + std::to_string(f));
  }
  return {d.d / f, d.h / f, d.w / f};
}

// Calls cell(coarse_index, fine_index) for every fine voxel.
template <typename F>
void for_each_cell(const Dims3& fine, std::size_t f, F&& cell) {
  const Dims3 c{fine.d / f, fine.h / f, fine.w / f};
  for (std::size_t z = 0; z < fine.d; ++z)
    for (std::size_t y = 0; y < fine.h; ++y)
      for (std::size_t x = 0; x < fine.w; ++x) cell(c.index(z / f, y / f, x / f), fine.index(z, y, x));
}

}  // namespace detail

/// Majority label of each f^3 block; ties go to the lowest label.
inline LabelVolume downsample_labels(const LabelVolume& fine, std::size_t f = 4) {
  const Dims3 cd = detail::coarse_dims(fine.dims, f, "downsample_labels");
  std::uint16_t classes = 0;
  for (auto l : fine.data) classes = std::max<std::uint16_t>(classes, l);
  const std::size_t k = static_cast<std::size_t>(classes) + 1;
  std::vector<std::uint32_t> votes(cd.count() * k, 0);
  detail::for_each_cell(fine.dims, f, [&](std::size_t c, std::size_t i) { ++votes[c * k + fine[i]]; });
  LabelVolume out(cd);
  for (std::size_t c = 0; c < cd.count(); ++c) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < k; ++l)
      if (votes[c * k + l] > votes[c * k + best]) best = l;
    out[c] = static_cast<std::uint16_t>(best);
  }
  return out;
}

/// A block is VisibleSurface if any of its voxels is; otherwise the majority
/// class, ties to the lowest enum value.
inline VisibilityVolume downsample_visibility(const VisibilityVolume& fine, std::size_t f = 4) {
  const Dims3 cd = detail::coarse_dims(fine.dims, f, "downsample_visibility");
  std::vector<std::uint32_t> votes(cd.count() * 4, 0);
  detail::for_each_cell(fine.dims, f, [&](std::size_t c, std::size_t i) {
    ++votes[c * 4 + static_cast<std::size_t>(fine[i])];
  });
  VisibilityVolume out(cd);
  for (std::size_t c = 0; c < cd.count(); ++c) {
    const std::uint32_t* v = &votes[c * 4];
    if (v[static_cast<int>(Visibility::kVisibleSurface)]) {
      out[c] = Visibility::kVisibleSurface;
      continue;
    }
    std::size_t best = 0;
    for (std::size_t l = 1; l < 4; ++l)
      if (v[l] > v[best]) best = l;
    out[c] = static_cast<Visibility>(best);
  }
  return out;
}

}  // namespace ssc
