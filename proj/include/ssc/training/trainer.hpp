#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssc/core/loss.hpp"
#include "ssc/core/random.hpp"
#include "ssc/core/sgd.hpp"
#include "ssc/evaluation/iou.hpp"
#include "ssc/networks/execute.hpp"
#include "ssc/training/examples.hpp"
#include "ssc/training/predict.hpp"

namespace ssc {

struct HyperParams {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t iterations = 500;
  std::size_t batch = 1;
  std::uint64_t seed = 1;
  LossMask mask = LossMask::kObserved;  // applied when the examples are built
  std::vector<double> class_weights;  // empty: all ones
  std::size_t checkpoint_every = 0;   // 0: never

  void validate() const {
    if (!(lr >= 0) || !std::isfinite(lr)) throw UsageError("learning rate must be finite and >= 0");
    if (!(momentum >= 0 && momentum < 1)) throw UsageError("momentum must lie in [0, 1)");
    if (iterations < 1) throw UsageError("iterations must be at least 1");
    if (batch < 1) throw UsageError("batch size must be at least 1");
  }
};

struct HistoryRow {
  std::size_t iteration = 0;  // 1-based
  double loss = 0;
  std::optional<double> completion_iou;
  std::optional<double> mean_iou;

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

using History = std::vector<HistoryRow>;

inline void write_history_csv(std::ostream& os, const History& h) {
  os << "iteration,loss,completion_iou,mean_semantic_iou\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  auto opt = [&](const std::optional<double>& v) {
    if (v) {
      os << *v;
    } else {
      os << "nan";
    }
  };
  for (const auto& r : h) {
    os << r.iteration << ',' << r.loss << ',';
    opt(r.completion_iou);
    os << ',';
    opt(r.mean_iou);
    os << '\n';
  }
}

template <typename T>
struct TrainHooks {
  std::function<void(std::size_t iteration, const NetworkGraph<T>&)> checkpoint;
  std::function<void(const HistoryRow&)> progress;
};

/// Order in which samples are visited: a fresh seeded shuffle each epoch.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  PortableRng rng(seed ^ (name_hash("epoch") + epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);
  return order;
}

/// SGD with momentum over the trainable blocks. Each iteration averages the
/// loss gradient of `batch` samples; the history row reports that batch's
/// mean loss and its IoUs from the pre-update predictions.
template <typename T>
History train(NetworkGraph<T>& net, const std::vector<Example<T>>& data, const HyperParams& hp,
              const TrainHooks<T>& hooks = {}) {
  hp.validate();
  if (data.empty()) throw DataError("train: dataset is empty");
  const Shape in_shape = net.input_shape();
  const Shape out_shape = net.output_shape();
  const Dims3 out_dims{out_shape[1], out_shape[2], out_shape[3]};
  for (const auto& ex : data) {
    if (ex.input.shape() != in_shape) {
      throw ShapeError("train: sample " + ex.id + " input " + shape_str(ex.input.shape()) +
                       " but the network expects " + shape_str(in_shape));
    }
    if (!(ex.labels.dims == out_dims)) {
      throw ShapeError("train: sample " + ex.id + " labels " + ex.labels.dims.str() +
                       " but the network outputs " + out_dims.str());
    }
  }
  const std::size_t classes = out_shape[0];
  if (!hp.class_weights.empty() && hp.class_weights.size() != classes) {
    throw UsageError("train: " + std::to_string(hp.class_weights.size()) + " class weights for " +
                     std::to_string(classes) + " classes");
  }
  std::vector<T> weights(hp.class_weights.begin(), hp.class_weights.end());

  History history;
  std::size_t epoch = 0, cursor = 0;
  std::vector<std::size_t> order = epoch_order(data.size(), hp.seed, epoch);
  const T lr = static_cast<T>(hp.lr), momentum = static_cast<T>(hp.momentum);
  const T inv_batch = T{1} / static_cast<T>(hp.batch);

  for (std::size_t it = 1; it <= hp.iterations; ++it) {
    std::map<std::string, BlockGrad<T>> grads;
    double loss = 0;
    SemanticCounts semantic(classes);
    CompletionCounts completion;
    for (std::size_t b = 0; b < hp.batch; ++b) {
      if (cursor == order.size()) {
        order = epoch_order(data.size(), hp.seed, ++epoch);
        cursor = 0;
      }
      const Example<T>& ex = data[order[cursor++]];
      const ForwardState<T> st = forward_train(net, ex.input);
      LossResult<T> res = softmax_cross_entropy(st.scores(), ex.labels, ex.loss, weights);
      if (!std::isfinite(static_cast<double>(res.loss))) {
        throw NumericalError("loss is not finite at iteration " + std::to_string(it) + " on sample " +
                             ex.id);
      }
      loss += static_cast<double>(res.loss);
      const LabelVolume pred = predict_labels(st.scores());
      semantic.add(pred, ex.labels, ex.semantic);
      completion.add(pred, ex.labels, ex.completion);
      if (hp.batch > 1)
        for (T& g : res.grad.values()) g *= inv_batch;
      Gradients<T> g = backward(net, st, res.grad);
      for (auto& [name, bg] : g.blocks) {
        auto found = grads.find(name);
        if (found == grads.end()) {
          grads.emplace(name, std::move(bg));
        } else {
          found->second.weight += bg.weight;
          found->second.bias += bg.bias;
        }
      }
    }
    for (auto& [name, block] : net.params()) {
      if (!block.trainable) continue;
      const BlockGrad<T>& g = grads.at(name);
      const T ratio = static_cast<T>(block.lr_ratio);
      sgd_step(block.weight, g.weight, block.weight_velocity, lr, momentum, ratio);
      sgd_step(block.bias, g.bias, block.bias_velocity, lr, momentum, ratio);
    }
    HistoryRow row{it, loss / static_cast<double>(hp.batch), completion.iou(), semantic_iou(semantic).mean};
    history.push_back(row);
    if (hooks.progress) hooks.progress(row);
    if (hooks.checkpoint && hp.checkpoint_every && it % hp.checkpoint_every == 0) hooks.checkpoint(it, net);
  }
  return history;
}

}  // namespace ssc
