#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssc/core/conv3d.hpp"
#include "ssc/core/error.hpp"
#include "ssc/core/pooling.hpp"
#include "ssc/core/tensor.hpp"
#include "ssc/core/volume.hpp"

namespace ssc {

enum class LayerKind { kInput, kConv, kRelu, kPool, kConcat, kAdd, kSlice };

inline const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kInput: return "input";
    case LayerKind::kConv: return "conv3d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kPool: return "pool";
    case LayerKind::kConcat: return "concat";
    case LayerKind::kAdd: return "add";
    case LayerKind::kSlice: return "slice";
  }
  return "?";
}

inline LayerKind parse_kind(const std::string& s) {
  for (LayerKind k : {LayerKind::kInput, LayerKind::kConv, LayerKind::kRelu, LayerKind::kPool,
                      LayerKind::kConcat, LayerKind::kAdd, LayerKind::kSlice})
    if (s == kind_name(k)) return k;
  throw DataError("unknown layer kind '" + s + "'");
}

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kInput;
  std::vector<std::size_t> inputs;  // indices of earlier layers
  ConvSpec conv;                    // kConv; the parameter block shares the layer name
  PoolSpec pool;                    // kPool
  std::size_t begin = 0, end = 0;   // kSlice channel range; kInput uses end as channel count

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

template <typename T>
struct ParamBlock {
  Tensor<T> weight;
  Tensor<T> bias;
  Tensor<T> weight_velocity;
  Tensor<T> bias_velocity;
  bool trainable = true;
  double lr_ratio = 1.0;
};

enum class Variant { kDepth, kEarly, kMid, kColour };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kDepth: return "depth";
    case Variant::kEarly: return "early";
    case Variant::kMid: return "mid";
    case Variant::kColour: return "colour";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::kDepth, Variant::kEarly, Variant::kMid, Variant::kColour})
    if (s == variant_name(v)) return v;
  throw UsageError("unknown variant '" + s + "' (expected depth, early, mid or colour)");
}

/// Channels the variant consumes: fTSDF, fTSDF + RGB, or RGB alone.
inline std::size_t input_channels(Variant v) {
  switch (v) {
    case Variant::kDepth: return 1;
    case Variant::kColour: return 3;
    default: return 4;
  }
}

struct NetConfig {
  Dims3 grid{64, 32, 64};  // input volume
  int classes = 12;
  double width = 0.5;      // channel multiplier on the 16/32 base widths
  bool residual = true;
  std::uint64_t seed = 1;  // parameter init

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Layers in topological order: every layer reads only from earlier ones,
/// the first layer is the single input and the last is the score output.
template <typename T>
class NetworkGraph {
 public:
  Variant variant = Variant::kDepth;
  NetConfig config;

  std::size_t add(LayerSpec l) {
    if (l.name.empty()) throw ShapeError("layer name must not be empty");
    if (find(l.name)) throw ShapeError("duplicate layer name '" + l.name + "'");
    for (std::size_t i : l.inputs)
      if (i >= layers_.size()) throw ShapeError("layer '" + l.name + "' reads a later layer");
    const std::size_t arity = l.inputs.size();
    const bool ok = l.kind == LayerKind::kInput    ? arity == 0 && layers_.empty() && l.end > 0
                    : l.kind == LayerKind::kConcat ? arity >= 1
                    : l.kind == LayerKind::kAdd    ? arity >= 2
                                                   : arity == 1;
    if (!ok) throw ShapeError("layer '" + l.name + "': bad inputs for " + kind_name(l.kind));
    if (l.kind == LayerKind::kConv) {
      l.conv.validate();
      ParamBlock<T> b;
      b.weight = Tensor<T>(l.conv.weight_shape());
      b.bias = Tensor<T>(Shape{static_cast<std::size_t>(l.conv.out_channels)});
      params_[l.name] = std::move(b);
    }
    if (l.kind == LayerKind::kSlice && l.begin >= l.end)
      throw ShapeError("layer '" + l.name + "': empty channel slice");
    layers_.push_back(std::move(l));
    return layers_.size() - 1;
  }

  std::size_t input(const std::string& name, std::size_t channels) {
    return add({name, LayerKind::kInput, {}, {}, {}, 0, channels});
  }
  std::size_t conv(const std::string& name, std::size_t from, const ConvSpec& spec) {
    return add({name, LayerKind::kConv, {from}, spec, {}, 0, 0});
  }
  std::size_t relu(const std::string& name, std::size_t from) {
    return add({name, LayerKind::kRelu, {from}, {}, {}, 0, 0});
  }
  std::size_t pool(const std::string& name, std::size_t from, const PoolSpec& spec = {}) {
    return add({name, LayerKind::kPool, {from}, {}, spec, 0, 0});
  }
  std::size_t concat(const std::string& name, std::vector<std::size_t> from) {
    return add({name, LayerKind::kConcat, std::move(from), {}, {}, 0, 0});
  }
  std::size_t sum(const std::string& name, std::vector<std::size_t> from) {
    return add({name, LayerKind::kAdd, std::move(from), {}, {}, 0, 0});
  }
  std::size_t slice(const std::string& name, std::size_t from, std::size_t begin, std::size_t end) {
    return add({name, LayerKind::kSlice, {from}, {}, {}, begin, end});
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const LayerSpec& layer(std::size_t i) const { return layers_.at(i); }
  std::size_t size() const { return layers_.size(); }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < layers_.size(); ++i)
      if (layers_[i].name == name) return i;
    return std::nullopt;
  }

  std::map<std::string, ParamBlock<T>>& params() { return params_; }
  const std::map<std::string, ParamBlock<T>>& params() const { return params_; }

  ParamBlock<T>& block(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ShapeError("no parameter block '" + name + "'");
    return it->second;
  }
  const ParamBlock<T>& block(const std::string& name) const {
    return const_cast<NetworkGraph*>(this)->block(name);
  }

  /// Conv layer names in execution order.
  std::vector<std::string> conv_layers() const {
    std::vector<std::string> out;
    for (const auto& l : layers_)
      if (l.kind == LayerKind::kConv) out.push_back(l.name);
    return out;
  }

  Shape input_shape() const {
    if (layers_.empty()) throw ShapeError("network has no layers");
    return {layers_.front().end, config.grid.d, config.grid.h, config.grid.w};
  }

  /// Output shape of every layer for the given input; throws ShapeError
  /// naming the first layer that cannot accept its inputs.
  std::vector<Shape> infer_shapes(const Shape& in) const {
    std::vector<Shape> s(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const LayerSpec& l = layers_[i];
      auto fail = [&](const std::string& why) -> void {
        throw ShapeError("layer '" + l.name + "': " + why);
      };
      switch (l.kind) {
        case LayerKind::kInput:
          if (in.size() != 4 || in[0] != l.end) {
            fail("expected input " + std::to_string(l.end) + "xDxHxW, got " + shape_str(in));
          }
          s[i] = in;
          break;
        case LayerKind::kConv: {
          const Shape& x = s[l.inputs[0]];
          if (x[0] != static_cast<std::size_t>(l.conv.in_channels)) {
            fail("input has " + std::to_string(x[0]) + " channels, conv expects " +
                 std::to_string(l.conv.in_channels));
          }
          Shape o{static_cast<std::size_t>(l.conv.out_channels), 0, 0, 0};
          for (int a = 0; a < 3; ++a) {
            const int n = l.conv.output_size(a, static_cast<int>(x[a + 1]));
            if (n < 1) fail("kernel does not fit the input " + shape_str(x));
            o[a + 1] = static_cast<std::size_t>(n);
          }
          s[i] = o;
          break;
        }
        case LayerKind::kRelu:
          s[i] = s[l.inputs[0]];
          break;
        case LayerKind::kPool: {
          const Shape& x = s[l.inputs[0]];
          Shape o{x[0], 0, 0, 0};
          for (int a = 0; a < 3; ++a) {
            const int n = l.pool.output_size(a, static_cast<int>(x[a + 1]));
            if (n < 1) fail("pool window larger than input " + shape_str(x));
            o[a + 1] = static_cast<std::size_t>(n);
          }
          s[i] = o;
          break;
        }
        case LayerKind::kConcat: {
          Shape o = s[l.inputs[0]];
          for (std::size_t k = 1; k < l.inputs.size(); ++k) {
            const Shape& x = s[l.inputs[k]];
            if (!std::equal(x.begin() + 1, x.end(), o.begin() + 1))
              fail("concat grids differ: " + shape_str(o) + " vs " + shape_str(x));
            o[0] += x[0];
          }
          s[i] = o;
          break;
        }
        case LayerKind::kAdd:
          for (std::size_t k = 1; k < l.inputs.size(); ++k)
            if (s[l.inputs[k]] != s[l.inputs[0]])
              fail("add operands differ: " + shape_str(s[l.inputs[0]]) + " vs " +
                   shape_str(s[l.inputs[k]]));
          s[i] = s[l.inputs[0]];
          break;
        case LayerKind::kSlice:
          if (l.end > s[l.inputs[0]][0]) fail("slice beyond channel count");
          s[i] = s[l.inputs[0]];
          s[i][0] = l.end - l.begin;
          break;
      }
    }
    return s;
  }

  Shape output_shape() const { return infer_shapes(input_shape()).back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& kv : params_) n += kv.second.weight.size() + kv.second.bias.size();
    return n;
  }

  /// Structural checks: one input first, every non-output layer consumed,
  /// parameters shaped as their conv specs, a 4-d output.
  void validate() const {
    if (layers_.empty() || layers_.front().kind != LayerKind::kInput)
      throw ShapeError("network must start with its input layer");
    std::vector<int> consumers(layers_.size(), 0);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const LayerSpec& l = layers_[i];
      if (i > 0 && l.kind == LayerKind::kInput) throw ShapeError("second input layer '" + l.name + "'");
      for (std::size_t j : l.inputs) {
        if (j >= i) throw ShapeError("layer '" + l.name + "' breaks topological order");
        ++consumers[j];
      }
      if (l.kind == LayerKind::kConv) {
        const auto it = params_.find(l.name);
        if (it == params_.end()) throw ShapeError("conv '" + l.name + "' has no parameters");
        if (it->second.weight.shape() != l.conv.weight_shape() ||
            it->second.bias.shape() != Shape{static_cast<std::size_t>(l.conv.out_channels)})
          throw ShapeError("conv '" + l.name + "' parameter shape does not match its spec");
      }
    }
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
      if (consumers[i] == 0) throw ShapeError("layer '" + layers_[i].name + "' is a dead end");
    if (params_.size() != conv_layers().size()) throw ShapeError("orphan parameter block");
  }

  template <typename U>
  NetworkGraph<U> cast() const {
    NetworkGraph<U> out;
    out.variant = variant;
    out.config = config;
    for (const auto& l : layers_) out.add(l);
    for (const auto& [name, b] : params_) {
      auto& o = out.block(name);
      o.weight = b.weight.template cast<U>();
      o.bias = b.bias.template cast<U>();
      o.trainable = b.trainable;
      o.lr_ratio = b.lr_ratio;
    }
    return out;
  }

 private:
  std::vector<LayerSpec> layers_;
  std::map<std::string, ParamBlock<T>> params_;
};

}  // namespace ssc
