#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssc/core/tensor.hpp"
#include "ssc/core/volume.hpp"

namespace ssc {

template <typename T>
struct LossResult {
  T loss = 0;
  Tensor<T> grad;  // same shape as scores
};

/// loss = sum_c w_c * mean_{masked voxels v with label c} -log softmax_c(v).
/// Classes with no masked voxel contribute nothing. Empty class_weights means
/// all ones.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& scores,
                                    const LabelVolume& labels,
                                    const MaskVolume& mask,
                                    const std::vector<T>& class_weights = {}) {
  require_rank(scores.shape(), 4, "softmax_cross_entropy scores");
  const std::size_t ncls = scores.dim(0);
  const Dims3 dims{scores.dim(1), scores.dim(2), scores.dim(3)};
  if (!(labels.dims == dims) || !(mask.dims == dims)) {
    throw ShapeError("softmax_cross_entropy: scores grid " + dims.str() +
                     " vs labels " + labels.dims.str() + " / mask " +
                     mask.dims.str());
  }
  if (!class_weights.empty() && class_weights.size() != ncls) {
    throw ShapeError("softmax_cross_entropy: " +
                     std::to_string(class_weights.size()) +
                     " class weights for " + std::to_string(ncls) + " classes");
  }
  const std::size_t n = dims.count();
  std::vector<std::size_t> counts(ncls, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask[v]) continue;
    if (labels[v] >= ncls) {
      throw ShapeError("softmax_cross_entropy: label " +
                       std::to_string(labels[v]) + " out of range for " +
                       std::to_string(ncls) + " classes");
    }
    ++counts[labels[v]];
  }
  std::vector<T> scale(ncls, T{0});
  for (std::size_t c = 0; c < ncls; ++c) {
    if (counts[c] == 0) continue;
    const T w = class_weights.empty() ? T{1} : class_weights[c];
    scale[c] = w / static_cast<T>(counts[c]);
  }

  LossResult<T> r{T{0}, Tensor<T>(scores.shape())};
  std::vector<T> prob(ncls);
  // Per-class partial sums keep the reduction order independent of voxel
  // interleaving across classes.
  std::vector<T> class_loss(ncls, T{0});
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask[v]) continue;
    const std::size_t label = labels[v];
    T m = scores[v];
    for (std::size_t c = 1; c < ncls; ++c) m = std::max(m, scores[c * n + v]);
    T sum = 0;
    for (std::size_t c = 0; c < ncls; ++c) {
      prob[c] = std::exp(scores[c * n + v] - m);
      sum += prob[c];
    }
    const T log_sum = std::log(sum);
    class_loss[label] += -(scores[label * n + v] - m - log_sum);
    const T s = scale[label];
    for (std::size_t c = 0; c < ncls; ++c) {
      const T p = prob[c] / sum;
      r.grad[c * n + v] = s * (p - (c == label ? T{1} : T{0}));
    }
  }
  for (std::size_t c = 0; c < ncls; ++c) r.loss += scale[c] * class_loss[c];
  return r;
}

}  // namespace ssc
