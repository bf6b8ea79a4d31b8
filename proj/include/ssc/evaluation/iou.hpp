#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssc/core/volume.hpp"
#include "ssc/geometry/visibility.hpp"

namespace ssc {

/// Occluded or never observed: where completion is scored.
inline MaskVolume occluded_mask(const VisibilityVolume& vis) {
  MaskVolume m(vis.dims);
  for (std::size_t i = 0; i < vis.size(); ++i) m[i] = occluded_like(vis[i]);
  return m;
}

enum class SemanticMask { kOccludedOrOccupied, kFullVolume };

/// Default semantic mask: occluded space plus every voxel the ground truth
/// occupies.
inline MaskVolume semantic_mask(const VisibilityVolume& vis, const LabelVolume& gt,
                                SemanticMask mode = SemanticMask::kOccludedOrOccupied) {
  require_same_dims(vis, gt, "semantic_mask");
  MaskVolume m(vis.dims, 1);
  if (mode == SemanticMask::kFullVolume) return m;
  for (std::size_t i = 0; i < vis.size(); ++i) m[i] = occluded_like(vis[i]) || gt[i] != 0;
  return m;
}

/// Intersection and union voxel counts per class. Accumulate over a dataset,
/// then divide once.
struct SemanticCounts {
  std::vector<std::uint64_t> intersection, union_;

  explicit SemanticCounts(std::size_t classes = 0) : intersection(classes, 0), union_(classes, 0) {}

  void add(const LabelVolume& pred, const LabelVolume& gt, const MaskVolume& mask) {
    require_same_dims(pred, gt, "iou_semantic");
    require_same_dims(pred, mask, "iou_semantic mask");
    const std::size_t n = intersection.size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!mask[i]) continue;
      const std::size_t p = pred[i], g = gt[i];
      if (p >= n || g >= n) throw ShapeError("iou_semantic: label out of range");
      if (p == g) {
        if (p) {
          ++intersection[p];
          ++union_[p];
        }
      } else {
        if (p) ++union_[p];
        if (g) ++union_[g];
      }
    }
  }

  SemanticCounts& operator+=(const SemanticCounts& o) {
    if (o.intersection.size() != intersection.size()) throw ShapeError("SemanticCounts: class count mismatch");
    for (std::size_t c = 0; c < intersection.size(); ++c) {
      intersection[c] += o.intersection[c];
      union_[c] += o.union_[c];
    }
    return *this;
  }
};

struct SemanticIoU {
  std::vector<std::optional<double>> per_class;  // index = class; free space and absent classes empty
  std::optional<double> mean;                    // over present classes
};

inline SemanticIoU semantic_iou(const SemanticCounts& c) {
  SemanticIoU r;
  r.per_class.assign(c.intersection.size(), std::nullopt);
  double sum = 0;
  std::size_t present = 0;
  for (std::size_t k = 1; k < c.intersection.size(); ++k) {
    if (c.union_[k] == 0) continue;
    r.per_class[k] = static_cast<double>(c.intersection[k]) / static_cast<double>(c.union_[k]);
    sum += *r.per_class[k];
    ++present;
  }
  if (present) r.mean = sum / static_cast<double>(present);
  return r;
}

inline SemanticIoU iou_semantic(const LabelVolume& pred, const LabelVolume& gt, const MaskVolume& mask,
                                std::size_t classes) {
  SemanticCounts c(classes);
  c.add(pred, gt, mask);
  return semantic_iou(c);
}

/// Binary occupancy counts over the occluded mask. `masked` tracks whether
/// any voxel was scored at all.
struct CompletionCounts {
  std::uint64_t intersection = 0, union_ = 0, masked = 0;

  void add(const LabelVolume& pred, const LabelVolume& gt, const MaskVolume& occluded) {
    require_same_dims(pred, gt, "iou_completion");
    require_same_dims(pred, occluded, "iou_completion mask");
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!occluded[i]) continue;
      ++masked;
      const bool p = pred[i] != 0, g = gt[i] != 0;
      intersection += p && g;
      union_ += p || g;
    }
  }

  CompletionCounts& operator+=(const CompletionCounts& o) {
    intersection += o.intersection;
    union_ += o.union_;
    masked += o.masked;
    return *this;
  }

  /// Undefined on an empty mask. A non-empty mask where neither volume is
  /// occupied scores 1: the prediction agrees everywhere.
  std::optional<double> iou() const {
    if (masked == 0) return std::nullopt;
    if (union_ == 0) return 1.0;
    return static_cast<double>(intersection) / static_cast<double>(union_);
  }
};

inline std::optional<double> iou_completion(const LabelVolume& pred, const LabelVolume& gt,
                                            const MaskVolume& occluded) {
  CompletionCounts c;
  c.add(pred, gt, occluded);
  return c.iou();
}

}  // namespace ssc
