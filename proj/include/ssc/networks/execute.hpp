#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssc/core/activation.hpp"
#include "ssc/core/concat.hpp"
#include "ssc/core/conv3d.hpp"
#include "ssc/core/pooling.hpp"
#include "ssc/networks/graph.hpp"

namespace ssc {

template <typename T>
struct ForwardState {
  std::vector<Tensor<T>> outputs;                  // one per layer
  std::vector<std::vector<std::size_t>> argmax;    // pool layers only

  const Tensor<T>& scores() const { return outputs.back(); }
};

/// Runs every layer in order and keeps the activations for backward.
template <typename T>
ForwardState<T> forward_train(const NetworkGraph<T>& net, const Tensor<T>& input) {
  const Shape expected = net.input_shape();
  if (input.shape() != expected) {
    throw ShapeError("network input " + shape_str(input.shape()) + " does not match " +
                     shape_str(expected));
  }
  ForwardState<T> st;
  st.outputs.resize(net.size());
  st.argmax.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec& l = net.layer(i);
    auto in = [&](std::size_t k) -> const Tensor<T>& { return st.outputs[l.inputs[k]]; };
    switch (l.kind) {
      case LayerKind::kInput:
        st.outputs[i] = input;
        break;
      case LayerKind::kConv: {
        const auto& b = net.block(l.name);
        st.outputs[i] = conv3d_forward(in(0), b.weight, b.bias, l.conv);
        break;
      }
      case LayerKind::kRelu:
        st.outputs[i] = relu(in(0));
        break;
      case LayerKind::kPool: {
        auto r = maxpool3d(in(0), l.pool);
        st.outputs[i] = std::move(r.output);
        st.argmax[i] = std::move(r.argmax);
        break;
      }
      case LayerKind::kConcat: {
        std::vector<const Tensor<T>*> parts;
        for (std::size_t k = 0; k < l.inputs.size(); ++k) parts.push_back(&in(k));
        st.outputs[i] = concat_channels(parts);
        break;
      }
      case LayerKind::kAdd: {
        Tensor<T> s = in(0);
        for (std::size_t k = 1; k < l.inputs.size(); ++k) s += in(k);
        st.outputs[i] = std::move(s);
        break;
      }
      case LayerKind::kSlice:
        st.outputs[i] = slice_channels(in(0), l.begin, l.end);
        break;
    }
  }
  return st;
}

template <typename T>
Tensor<T> forward(const NetworkGraph<T>& net, const Tensor<T>& input) {
  return std::move(forward_train(net, input).outputs.back());
}

template <typename T>
struct BlockGrad {
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
struct Gradients {
  std::map<std::string, BlockGrad<T>> blocks;
  Tensor<T> input;  // only when requested
};

/// Reverse pass from dLoss/dScores. Gradients reaching a layer from several
/// consumers are summed.
template <typename T>
Gradients<T> backward(const NetworkGraph<T>& net, const ForwardState<T>& st,
                      const Tensor<T>& grad_scores, bool input_grad = false) {
  if (st.outputs.size() != net.size()) throw ShapeError("backward: state from another network");
  if (grad_scores.shape() != st.scores().shape()) {
    throw ShapeError("backward: grad " + shape_str(grad_scores.shape()) + " vs scores " +
                     shape_str(st.scores().shape()));
  }
  const std::size_t n = net.size();
  // needed[i]: some parameter or the requested input lies upstream of layer i.
  std::vector<char> needed(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const LayerSpec& l = net.layer(i);
    if (l.kind == LayerKind::kInput) {
      needed[i] = input_grad;
      continue;
    }
    needed[i] = l.kind == LayerKind::kConv;
    for (std::size_t j : l.inputs) needed[i] |= needed[j];
  }

  std::vector<Tensor<T>> grad(n);
  auto accumulate = [&](std::size_t j, Tensor<T>&& g) {
    if (!needed[j]) return;
    if (grad[j].empty()) {
      grad[j] = std::move(g);
    } else {
      grad[j] += g;
    }
  };
  grad[n - 1] = grad_scores;
  Gradients<T> out;
  for (std::size_t i = n; i-- > 0;) {
    const LayerSpec& l = net.layer(i);
    if (grad[i].empty()) continue;  // nothing downstream depends on this layer
    const Tensor<T>& g = grad[i];
    switch (l.kind) {
      case LayerKind::kInput:
        out.input = g;
        break;
      case LayerKind::kConv: {
        const std::size_t src = l.inputs[0];
        auto cg = conv3d_backward(st.outputs[src], net.block(l.name).weight, l.conv, g,
                                  static_cast<bool>(needed[src]));
        out.blocks[l.name] = {std::move(cg.weights), std::move(cg.bias)};
        if (needed[src]) accumulate(src, std::move(cg.input));
        break;
      }
      case LayerKind::kRelu:
        accumulate(l.inputs[0], relu_backward(st.outputs[l.inputs[0]], g));
        break;
      case LayerKind::kPool:
        accumulate(l.inputs[0],
                   maxpool3d_backward(st.outputs[l.inputs[0]].shape(), st.argmax[i], g));
        break;
      case LayerKind::kConcat: {
        std::vector<std::size_t> channels;
        for (std::size_t j : l.inputs) channels.push_back(st.outputs[j].dim(0));
        auto parts = split_channels(g, channels);
        for (std::size_t k = 0; k < l.inputs.size(); ++k)
          accumulate(l.inputs[k], std::move(parts[k]));
        break;
      }
      case LayerKind::kAdd:
        for (std::size_t j : l.inputs) accumulate(j, Tensor<T>(g));
        break;
      case LayerKind::kSlice: {
        const Tensor<T>& src = st.outputs[l.inputs[0]];
        Tensor<T> full(src.shape());
        const std::size_t plane = src.size() / src.dim(0);
        std::copy(g.data(), g.data() + g.size(), full.data() + l.begin * plane);
        accumulate(l.inputs[0], std::move(full));
        break;
      }
    }
    if (i != n - 1) grad[i] = Tensor<T>();  // release once consumed
  }
  // Convs cut off from the loss still get zero gradients.
  for (const auto& name : net.conv_layers()) {
    if (out.blocks.count(name)) continue;
    const auto& b = net.block(name);
    out.blocks[name] = {Tensor<T>(b.weight.shape()), Tensor<T>(b.bias.shape())};
  }
  return out;
}

}  // namespace ssc
