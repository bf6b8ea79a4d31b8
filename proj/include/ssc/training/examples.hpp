#pragma once

#include <string>
#include <vector>

#include "ssc/encodings/colour.hpp"
#include "ssc/encodings/ftsdf.hpp"
#include "ssc/encodings/fusion.hpp"
#include "ssc/evaluation/iou.hpp"
#include "ssc/networks/graph.hpp"
#include "ssc/synth/dataset.hpp"
#include "ssc/training/downsample.hpp"

namespace ssc {

/// Network inputs at full resolution plus the fine ground truth.
struct EncodedSample {
  std::string id;
  Tensor<float> ftsdf;   // 1 x D x H x W
  Tensor<float> colour;  // 3 x D x H x W
  LabelVolume labels;
  VisibilityVolume visibility;
};

inline EncodedSample encode_sample(const Sample& s, const CameraIntrinsics& intr, const VoxelGrid& grid,
                                   double tau = 4.0, double max_range = 10.0) {
  EncodedSample e;
  e.id = s.id;
  e.ftsdf = ftsdf_encode<float>(s.visibility, tau);
  e.colour = colour_encode<float>(s.rgb, s.depth, intr, s.pose, grid, s.visibility, max_range).volume;
  e.labels = s.labels;
  e.visibility = s.visibility;
  return e;
}

/// The input tensor a variant consumes.
template <typename T = float>
Tensor<T> network_input(const EncodedSample& e, Variant v) {
  switch (v) {
    case Variant::kDepth: return e.ftsdf.cast<T>();
    case Variant::kColour: return e.colour.cast<T>();
    default: return early_fusion_input(e.ftsdf, e.colour).cast<T>();
  }
}

enum class LossMask { kObserved, kAll };

inline const char* loss_mask_name(LossMask m) { return m == LossMask::kAll ? "all" : "observed"; }

inline LossMask parse_loss_mask(const std::string& s) {
  if (s == "observed") return LossMask::kObserved;
  if (s == "all") return LossMask::kAll;
  throw UsageError("unknown loss mask '" + s + "' (expected observed or all)");
}

/// kObserved: occluded and unobserved voxels plus the visible surface; the
/// visible free space in front of the surface carries no loss.
inline MaskVolume loss_mask(const VisibilityVolume& vis, LossMask policy) {
  MaskVolume m(vis.dims, 1);
  if (policy == LossMask::kAll) return m;
  for (std::size_t i = 0; i < vis.size(); ++i) m[i] = vis[i] != Visibility::kVisibleFree;
  return m;
}

/// One training or evaluation item at the network output resolution.
template <typename T>
struct Example {
  std::string id;
  Tensor<T> input;
  LabelVolume labels;          // downsampled ground truth
  MaskVolume loss;             // voxels that contribute to the loss
  MaskVolume completion;       // occluded voxels
  MaskVolume semantic;         // occluded or occupied
  MaskVolume semantic_full;    // every voxel
};

template <typename T = float>
Example<T> make_example(const EncodedSample& e, Variant v, LossMask policy, std::size_t factor = 4) {
  Example<T> ex;
  ex.id = e.id;
  ex.input = network_input<T>(e, v);
  ex.labels = downsample_labels(e.labels, factor);
  const VisibilityVolume vis = downsample_visibility(e.visibility, factor);
  ex.loss = loss_mask(vis, policy);
  ex.completion = occluded_mask(vis);
  ex.semantic = semantic_mask(vis, ex.labels);
  ex.semantic_full = semantic_mask(vis, ex.labels, SemanticMask::kFullVolume);
  return ex;
}

template <typename T = float>
std::vector<Example<T>> make_examples(const std::vector<EncodedSample>& data, Variant v, LossMask policy,
                                      std::size_t factor = 4) {
  std::vector<Example<T>> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back(make_example<T>(e, v, policy, factor));
  return out;
}

}  // namespace ssc
