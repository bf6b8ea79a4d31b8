#pragma once

#include "ssc/core/concat.hpp"
#include "ssc/core/tensor.hpp"

namespace ssc {

/// Channel 0 = fTSDF, channels 1-3 = RGB.
template <typename T>
Tensor<T> early_fusion_input(const Tensor<T>& ftsdf, const Tensor<T>& colour) {
  require_rank(ftsdf.shape(), 4, "early_fusion_input fTSDF");
  require_rank(colour.shape(), 4, "early_fusion_input colour");
  if (ftsdf.dim(0) != 1 || colour.dim(0) != 3) {
    throw ShapeError("early_fusion_input: expected 1 fTSDF and 3 colour channels, got " +
                     shape_str(ftsdf.shape()) + " and " + shape_str(colour.shape()));
  }
  return concat_channels(std::vector<const Tensor<T>*>{&ftsdf, &colour});
}

}  // namespace ssc
