#pragma once

#include "ssc/core/tensor.hpp"

namespace ssc {

/// v <- momentum * v - (lr * ratio) * g;  p <- p + v.
/// A zero effective rate leaves params and velocity untouched.
template <typename T>
void sgd_step(Tensor<T>& params, const Tensor<T>& grads, Tensor<T>& velocity,
              T lr, T momentum, T lr_ratio) {
  if (grads.shape() != params.shape()) {
    throw ShapeError("sgd_step: grad " + shape_str(grads.shape()) +
                     " vs params " + shape_str(params.shape()));
  }
  if (velocity.shape() != params.shape()) velocity = Tensor<T>(params.shape());
  const T rate = lr * lr_ratio;
  if (rate == T{0} && momentum == T{0}) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] - rate * grads[i];
    params[i] += velocity[i];
  }
}

}  // namespace ssc
