#pragma once

#include "ssc/core/tensor.hpp"

namespace ssc {

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out = input;
  // NaN passes through so divergence surfaces in the loss.
  for (auto& v : out.storage()) v = v < T{0} ? T{0} : v;
  return out;
}

// Subgradient at 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  if (input.shape() != grad_out.shape()) {
    throw ShapeError("relu_backward: input " + shape_str(input.shape()) +
                     " vs grad " + shape_str(grad_out.shape()));
  }
  Tensor<T> g(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i)
    g[i] = input[i] > T{0} ? grad_out[i] : T{0};
  return g;
}

}  // namespace ssc
