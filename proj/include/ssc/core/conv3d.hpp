#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "ssc/core/parallel.hpp"
#include "ssc/core/tensor.hpp"

namespace ssc {

using Triple = std::array<int, 3>;  // (z, y, x)

inline Triple iso(int v) { return {v, v, v}; }

struct ConvSpec {
  int in_channels = 1;
  int out_channels = 1;
  Triple kernel = iso(3);
  Triple stride = iso(1);
  Triple pad = iso(0);
  Triple dilation = iso(1);

  static ConvSpec cube(int in, int out, int k, int s = 1, int p = 0,
                       int d = 1) {
    return {in, out, iso(k), iso(s), iso(p), iso(d)};
  }

  int extent(int axis) const { return dilation[axis] * (kernel[axis] - 1) + 1; }

  // floor((in + 2p - d(k-1) - 1) / s) + 1, or <= 0 if the window never fits.
  int output_size(int axis, int in) const {
    const int span = in + 2 * pad[axis] - extent(axis);
    if (span < 0) return 0;
    return span / stride[axis] + 1;
  }

  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel[0] *
           kernel[1] * kernel[2];
  }

  Shape weight_shape() const {
    return {static_cast<std::size_t>(out_channels),
            static_cast<std::size_t>(in_channels),
            static_cast<std::size_t>(kernel[0]),
            static_cast<std::size_t>(kernel[1]),
            static_cast<std::size_t>(kernel[2])};
  }

  void validate() const {
    if (in_channels < 1 || out_channels < 1) {
      throw ShapeError("conv spec: channel counts must be positive");
    }
    for (int a = 0; a < 3; ++a) {
      if (kernel[a] < 1 || stride[a] < 1 || dilation[a] < 1 || pad[a] < 0) {
        throw ShapeError("conv spec: invalid kernel/stride/pad/dilation on axis " +
                         std::to_string(a));
      }
    }
  }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

namespace detail {

inline const char* axis_name(int a) {
  static const char* names[] = {"depth", "height", "width"};
  return names[a];
}

// Output shape of a conv, with every consistency check the kernels rely on.
template <typename T>
Shape conv_output_shape(const Tensor<T>& input, const Tensor<T>& weights,
                        const ConvSpec& spec) {
  spec.validate();
  require_rank(input.shape(), 4, "conv3d input");
  require_rank(weights.shape(), 5, "conv3d weights");
  if (input.dim(0) != static_cast<std::size_t>(spec.in_channels)) {
    throw ShapeError("conv3d: input channel axis is " +
                     std::to_string(input.dim(0)) + ", spec expects " +
                     std::to_string(spec.in_channels));
  }
  if (weights.shape() != spec.weight_shape()) {
    throw ShapeError("conv3d: weights " + shape_str(weights.shape()) +
                     " do not match spec " + shape_str(spec.weight_shape()));
  }
  Shape out{static_cast<std::size_t>(spec.out_channels), 0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    const int o = spec.output_size(a, static_cast<int>(input.dim(a + 1)));
    if (o < 1) {
      throw ShapeError(std::string("conv3d: ") + axis_name(a) +
                       " axis of extent " + std::to_string(input.dim(a + 1)) +
                       " is too small for the effective kernel extent " +
                       std::to_string(spec.extent(a)));
    }
    out[a + 1] = static_cast<std::size_t>(o);
  }
  return out;
}

// Output positions o in [lo, hi) with 0 <= o*s + off < n.
inline void valid_range(int n, int out_n, int s, int off, int& lo, int& hi) {
  // o*s + off >= 0  ->  o >= ceil(-off / s)
  lo = off >= 0 ? 0 : (-off + s - 1) / s;
  // o*s + off <= n - 1
  const int top = n - 1 - off;
  hi = top < 0 ? 0 : top / s + 1;
  if (hi > out_n) hi = out_n;
  if (lo > hi) lo = hi;
}

}  // namespace detail

/// out[c,z,y,x] = bias[c] + sum w[c,c',i,j,l] * in[c', z*s - p + i*d, ...]
/// with zero padding. Parallel over output channels; each channel
/// accumulates in a fixed order, so results do not depend on thread count.
template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& bias, const ConvSpec& spec) {
  const Shape out_shape = detail::conv_output_shape(input, weights, spec);
  if (bias.rank() != 1 ||
      bias.dim(0) != static_cast<std::size_t>(spec.out_channels)) {
    throw ShapeError("conv3d: bias " + shape_str(bias.shape()) +
                     " does not match out_channels " +
                     std::to_string(spec.out_channels));
  }
  Tensor<T> out(out_shape);
  const int cin = spec.in_channels;
  const int D = static_cast<int>(input.dim(1)), H = static_cast<int>(input.dim(2)),
            W = static_cast<int>(input.dim(3));
  const int Do = static_cast<int>(out_shape[1]), Ho = static_cast<int>(out_shape[2]),
            Wo = static_cast<int>(out_shape[3]);
  const auto [kd, kh, kw] = spec.kernel;
  const auto [sd, sh, sw] = spec.stride;
  const auto [pd, ph, pw] = spec.pad;
  const auto [dd, dh, dw] = spec.dilation;
  const std::size_t in_plane = static_cast<std::size_t>(D) * H * W;
  const std::size_t out_plane = static_cast<std::size_t>(Do) * Ho * Wo;
  const T* in = input.data();
  const T* wt = weights.data();
  T* o = out.data();

  parallel_for(spec.out_channels, [&](std::ptrdiff_t co) {
    T* oc = o + co * out_plane;
    std::fill(oc, oc + out_plane, bias[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const T* ic = in + ci * in_plane;
      for (int i = 0; i < kd; ++i) {
        int z_lo, z_hi;
        detail::valid_range(D, Do, sd, i * dd - pd, z_lo, z_hi);
        for (int j = 0; j < kh; ++j) {
          int y_lo, y_hi;
          detail::valid_range(H, Ho, sh, j * dh - ph, y_lo, y_hi);
          for (int l = 0; l < kw; ++l) {
            int x_lo, x_hi;
            const int xoff = l * dw - pw;
            detail::valid_range(W, Wo, sw, xoff, x_lo, x_hi);
            const T w = wt[(((co * cin + ci) * kd + i) * kh + j) * kw + l];
            if (w == T{0} || x_lo >= x_hi) continue;
            for (int z = z_lo; z < z_hi; ++z) {
              const int iz = z * sd + i * dd - pd;
              for (int y = y_lo; y < y_hi; ++y) {
                const int iy = y * sh + j * dh - ph;
                const T* irow = ic + (static_cast<std::size_t>(iz) * H + iy) * W;
                T* orow = oc + (static_cast<std::size_t>(z) * Ho + y) * Wo;
                if (sw == 1) {
                  const T* src = irow + xoff;
                  for (int x = x_lo; x < x_hi; ++x) orow[x] += w * src[x];
                } else {
                  for (int x = x_lo; x < x_hi; ++x)
                    orow[x] += w * irow[x * sw + xoff];
                }
              }
            }
          }
        }
      }
    }
  });
  return out;
}

template <typename T>
struct ConvGrads {
  Tensor<T> input;    // empty when not requested
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
ConvGrads<T> conv3d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                             const ConvSpec& spec, const Tensor<T>& grad_out,
                             bool need_input_grad = true) {
  const Shape out_shape = detail::conv_output_shape(input, weights, spec);
  if (grad_out.shape() != out_shape) {
    throw ShapeError("conv3d_backward: grad_out " +
                     shape_str(grad_out.shape()) +
                     " does not match forward output " + shape_str(out_shape));
  }
  const int cin = spec.in_channels, cout = spec.out_channels;
  const int D = static_cast<int>(input.dim(1)), H = static_cast<int>(input.dim(2)),
            W = static_cast<int>(input.dim(3));
  const int Do = static_cast<int>(out_shape[1]), Ho = static_cast<int>(out_shape[2]),
            Wo = static_cast<int>(out_shape[3]);
  const auto [kd, kh, kw] = spec.kernel;
  const auto [sd, sh, sw] = spec.stride;
  const auto [pd, ph, pw] = spec.pad;
  const auto [dd, dh, dw] = spec.dilation;
  const std::size_t in_plane = static_cast<std::size_t>(D) * H * W;
  const std::size_t out_plane = static_cast<std::size_t>(Do) * Ho * Wo;
  const T* in = input.data();
  const T* wt = weights.data();
  const T* g = grad_out.data();

  ConvGrads<T> grads;
  grads.weights = Tensor<T>(weights.shape());
  grads.bias = Tensor<T>(Shape{static_cast<std::size_t>(cout)});
  T* gw = grads.weights.data();

  parallel_for(cout, [&](std::ptrdiff_t co) {
    const T* gc = g + co * out_plane;
    T b = 0;
    for (std::size_t k = 0; k < out_plane; ++k) b += gc[k];
    grads.bias[co] = b;
    for (int ci = 0; ci < cin; ++ci) {
      const T* ic = in + ci * in_plane;
      for (int i = 0; i < kd; ++i) {
        int z_lo, z_hi;
        detail::valid_range(D, Do, sd, i * dd - pd, z_lo, z_hi);
        for (int j = 0; j < kh; ++j) {
          int y_lo, y_hi;
          detail::valid_range(H, Ho, sh, j * dh - ph, y_lo, y_hi);
          for (int l = 0; l < kw; ++l) {
            int x_lo, x_hi;
            const int xoff = l * dw - pw;
            detail::valid_range(W, Wo, sw, xoff, x_lo, x_hi);
            T acc = 0;
            for (int z = z_lo; z < z_hi; ++z) {
              const int iz = z * sd + i * dd - pd;
              for (int y = y_lo; y < y_hi; ++y) {
                const int iy = y * sh + j * dh - ph;
                const T* irow = ic + (static_cast<std::size_t>(iz) * H + iy) * W;
                const T* grow = gc + (static_cast<std::size_t>(z) * Ho + y) * Wo;
                for (int x = x_lo; x < x_hi; ++x)
                  acc += grow[x] * irow[x * sw + xoff];
              }
            }
            gw[(((co * cin + ci) * kd + i) * kh + j) * kw + l] = acc;
          }
        }
      }
    }
  });

  if (need_input_grad) {
    grads.input = Tensor<T>(input.shape());
    T* gi = grads.input.data();
    parallel_for(cin, [&](std::ptrdiff_t ci) {
      T* gic = gi + ci * in_plane;
      for (int co = 0; co < cout; ++co) {
        const T* gc = g + co * out_plane;
        for (int i = 0; i < kd; ++i) {
          int z_lo, z_hi;
          detail::valid_range(D, Do, sd, i * dd - pd, z_lo, z_hi);
          for (int j = 0; j < kh; ++j) {
            int y_lo, y_hi;
            detail::valid_range(H, Ho, sh, j * dh - ph, y_lo, y_hi);
            for (int l = 0; l < kw; ++l) {
              int x_lo, x_hi;
              const int xoff = l * dw - pw;
              detail::valid_range(W, Wo, sw, xoff, x_lo, x_hi);
              const T w = wt[(((co * cin + ci) * kd + i) * kh + j) * kw + l];
              if (w == T{0} || x_lo >= x_hi) continue;
              for (int z = z_lo; z < z_hi; ++z) {
                const int iz = z * sd + i * dd - pd;
                for (int y = y_lo; y < y_hi; ++y) {
                  const int iy = y * sh + j * dh - ph;
                  T* irow = gic + (static_cast<std::size_t>(iz) * H + iy) * W;
                  const T* grow = gc + (static_cast<std::size_t>(z) * Ho + y) * Wo;
                  if (sw == 1) {
                    T* dst = irow + xoff;
                    for (int x = x_lo; x < x_hi; ++x) dst[x] += w * grow[x];
                  } else {
                    for (int x = x_lo; x < x_hi; ++x)
                      irow[x * sw + xoff] += w * grow[x];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return grads;
}

}  // namespace ssc
