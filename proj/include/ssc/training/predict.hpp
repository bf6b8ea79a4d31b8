#pragma once

#include <cstdint>

#include "ssc/core/volume.hpp"
#include "ssc/networks/execute.hpp"

namespace ssc {

/// Per-voxel argmax over class scores, ties to the lowest class. Softmax is
/// monotone, so raw scores give the same labels.
template <typename T>
LabelVolume predict_labels(const Tensor<T>& scores) {
  require_rank(scores.shape(), 4, "predict_labels scores");
  const Dims3 d{scores.dim(1), scores.dim(2), scores.dim(3)};
  const std::size_t n = d.count(), classes = scores.dim(0);
  LabelVolume out(d);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c)
      if (scores[c * n + v] > scores[best * n + v]) best = c;
    out[v] = static_cast<std::uint16_t>(best);
  }
  return out;
}

template <typename T>
LabelVolume predict(const NetworkGraph<T>& net, const Tensor<T>& input) {
  return predict_labels(forward(net, input));
}

}  // namespace ssc
