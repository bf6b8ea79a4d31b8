#pragma once

#include <algorithm>
#include <vector>

#include "ssc/core/tensor.hpp"

namespace ssc {

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape& first = inputs.front()->shape();
  require_rank(first, 4, "concat_channels input");
  std::size_t channels = 0;
  for (const Tensor<T>* t : inputs) {
    require_rank(t->shape(), 4, "concat_channels input");
    for (int a = 1; a < 4; ++a) {
      if (t->dim(a) != first[a]) {
        throw ShapeError("concat_channels: spatial mismatch " +
                         shape_str(t->shape()) + " vs " + shape_str(first));
      }
    }
    channels += t->dim(0);
  }
  Tensor<T> out(Shape{channels, first[1], first[2], first[3]});
  T* dst = out.data();
  for (const Tensor<T>* t : inputs) dst = std::copy(t->data(), t->data() + t->size(), dst);
  return out;
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& inputs) {
  std::vector<const Tensor<T>*> ptrs;
  for (const auto& t : inputs) ptrs.push_back(&t);
  return concat_channels(ptrs);
}

// Channels [begin, end) of a C x D x H x W tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, std::size_t begin,
                         std::size_t end) {
  require_rank(input.shape(), 4, "slice_channels input");
  if (begin >= end || end > input.dim(0)) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") outside channel axis of " +
                     shape_str(input.shape()));
  }
  const std::size_t plane = input.dim(1) * input.dim(2) * input.dim(3);
  Tensor<T> out(Shape{end - begin, input.dim(1), input.dim(2), input.dim(3)});
  std::copy(input.data() + begin * plane, input.data() + end * plane, out.data());
  return out;
}

// Backward of concat: splits grad back along the channel axis.
template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& grad,
                                      const std::vector<std::size_t>& channels) {
  std::vector<Tensor<T>> parts;
  std::size_t begin = 0;
  for (std::size_t c : channels) {
    parts.push_back(slice_channels(grad, begin, begin + c));
    begin += c;
  }
  if (begin != grad.dim(0)) {
    throw ShapeError("split_channels: channel counts do not sum to " +
                     std::to_string(grad.dim(0)));
  }
  return parts;
}

}  // namespace ssc
