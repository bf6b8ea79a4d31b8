// Synthesises a few rooms, trains a small depth network on them and prints
// the evaluation table. Runs in a few seconds on a coarse grid.

#include <iostream>

#include "ssc/evaluation/evaluate.hpp"
#include "ssc/networks/builders.hpp"
#include "ssc/training/trainer.hpp"

int main() {
  using namespace ssc;
  const CameraIntrinsics K = default_intrinsics();
  const VoxelGrid grid{{-1.92, -0.92, 0.5}, 0.12, {32, 16, 32}};

  std::vector<EncodedSample> scenes;
  for (const auto& s : make_dataset(7, 3, grid, K)) scenes.push_back(encode_sample(s, K, grid));
  const auto data = make_examples<float>(scenes, Variant::kDepth, LossMask::kObserved);

  NetConfig cfg;
  cfg.grid = grid.dims;
  cfg.width = 0.25;
  auto net = build_network<float>(Variant::kDepth, cfg);

  HyperParams hp;
  hp.lr = 0.002;
  hp.iterations = 300;
  TrainHooks<float> hooks;
  hooks.progress = [](const HistoryRow& r) {
    if (r.iteration % 50 == 0) std::cout << "iter " << r.iteration << "  loss " << r.loss << '\n';
  };
  train(net, data, hp, hooks);

  print_report(std::cout, evaluate_dataset(net, data, LabelSet{}));
}
