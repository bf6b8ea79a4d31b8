#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssc/core/conv3d.hpp"
#include "ssc/core/tensor.hpp"

namespace ssc {

struct PoolSpec {
  Triple window = iso(2);
  Triple stride = iso(2);

  int output_size(int axis, int in) const {
    if (in < window[axis]) return 0;
    return (in - window[axis]) / stride[axis] + 1;
  }
  friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

template <typename T>
struct PoolResult {
  Tensor<T> output;
  // Linear index into the input tensor of each output's maximum.
  std::vector<std::size_t> argmax;
};

/// Max pooling without padding. Ties go to the lowest linear input index.
template <typename T>
PoolResult<T> maxpool3d(const Tensor<T>& input, const PoolSpec& spec) {
  require_rank(input.shape(), 4, "maxpool3d input");
  Shape out_shape{input.dim(0), 0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    if (spec.window[a] < 1 || spec.stride[a] < 1) {
      throw ShapeError("maxpool3d: window and stride must be positive");
    }
    const int o = spec.output_size(a, static_cast<int>(input.dim(a + 1)));
    if (o < 1) {
      throw ShapeError(std::string("maxpool3d: window ") +
                       std::to_string(spec.window[a]) + " exceeds " +
                       detail::axis_name(a) + " extent " +
                       std::to_string(input.dim(a + 1)));
    }
    out_shape[a + 1] = static_cast<std::size_t>(o);
  }
  PoolResult<T> r{Tensor<T>(out_shape), std::vector<std::size_t>()};
  r.argmax.resize(r.output.size());
  const std::size_t C = input.dim(0);
  const std::size_t Do = out_shape[1], Ho = out_shape[2], Wo = out_shape[3];
  parallel_for(static_cast<std::ptrdiff_t>(C), [&](std::ptrdiff_t c) {
    for (std::size_t z = 0; z < Do; ++z)
      for (std::size_t y = 0; y < Ho; ++y)
        for (std::size_t x = 0; x < Wo; ++x) {
          std::size_t best = input.offset(c, z * spec.stride[0],
                                          y * spec.stride[1], x * spec.stride[2]);
          T best_v = input[best];
          // Window scanned in increasing linear order; strict > keeps the
          // lowest index on ties.
          for (int i = 0; i < spec.window[0]; ++i)
            for (int j = 0; j < spec.window[1]; ++j)
              for (int l = 0; l < spec.window[2]; ++l) {
                const std::size_t k =
                    input.offset(c, z * spec.stride[0] + i,
                                 y * spec.stride[1] + j, x * spec.stride[2] + l);
                if (input[k] > best_v) {
                  best_v = input[k];
                  best = k;
                }
              }
          const std::size_t o = r.output.offset(c, z, y, x);
          r.output[o] = best_v;
          r.argmax[o] = best;
        }
  });
  return r;
}

template <typename T>
Tensor<T> maxpool3d_backward(const Shape& input_shape,
                             const std::vector<std::size_t>& argmax,
                             const Tensor<T>& grad_out) {
  if (argmax.size() != grad_out.size()) {
    throw ShapeError("maxpool3d_backward: argmax/grad size mismatch");
  }
  Tensor<T> g(input_shape);
  // Overlapping windows can route several outputs to one input.
  for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += grad_out[o];
  return g;
}

}  // namespace ssc
