#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ssc/networks/builders.hpp"
#include "ssc/training/downsample.hpp"
#include "ssc/training/predict.hpp"
#include "ssc/training/strategy.hpp"
#include "ssc/training/trainer.hpp"
#include "test_util.hpp"

namespace ssc {
namespace {

// The desk room at 24 cm voxels: 16 x 8 x 16 in, 4 x 2 x 4 out.
VoxelGrid coarse_grid() { return {{-1.92, -0.92, 0.5}, 0.24, {16, 8, 16}}; }

NetConfig tiny_cfg() {
  NetConfig c;
  c.grid = coarse_grid().dims;
  c.width = 0.25;
  return c;
}

template <typename T = float>
std::vector<Example<T>> tiny_examples(std::size_t n, Variant v, std::uint64_t seed = 3) {
  const auto grid = coarse_grid();
  const auto K = default_intrinsics();
  std::vector<EncodedSample> enc;
  for (const auto& s : make_dataset(seed, n, grid, K)) enc.push_back(encode_sample(s, K, grid));
  return make_examples<T>(enc, v, LossMask::kObserved);
}

TEST(Downsample, MajorityWithLowestTie) {
  LabelVolume fine(Dims3{2, 2, 2}, 0);
  fine.data = {3, 3, 3, 5, 5, 5, 0, 0};
  EXPECT_EQ(downsample_labels(fine, 2)[0], 3);
  fine.data = {3, 3, 3, 5, 5, 5, 5, 0};
  EXPECT_EQ(downsample_labels(fine, 2)[0], 5);
  fine.data = {1, 1, 2, 2, 3, 3, 4, 4};
  EXPECT_EQ(downsample_labels(fine, 2)[0], 1);
  EXPECT_THROW(downsample_labels(LabelVolume(Dims3{3, 4, 4}), 2), ShapeError);
}

TEST(Downsample, BlocksAreIndependent) {
  LabelVolume fine(Dims3{4, 2, 2}, 0);
  for (std::size_t i = 8; i < 16; ++i) fine[i] = 7;
  const auto c = downsample_labels(fine, 2);
  ASSERT_EQ(c.dims, (Dims3{2, 1, 1}));
  EXPECT_EQ(c[0], 0);
  EXPECT_EQ(c[1], 7);
}

TEST(Downsample, AnySurfaceMakesSurface) {
  VisibilityVolume v(Dims3{2, 2, 2}, Visibility::kOccluded);
  v[5] = Visibility::kVisibleSurface;
  EXPECT_EQ(downsample_visibility(v, 2)[0], Visibility::kVisibleSurface);
  v[5] = Visibility::kVisibleFree;
  EXPECT_EQ(downsample_visibility(v, 2)[0], Visibility::kOccluded);
  for (std::size_t i = 0; i < 4; ++i) v[i] = Visibility::kVisibleFree;
  for (std::size_t i = 4; i < 8; ++i) v[i] = Visibility::kOutsideFrustum;
  EXPECT_EQ(downsample_visibility(v, 2)[0], Visibility::kVisibleFree);
}

TEST(LossMask, ObservedSkipsVisibleFreeSpace) {
  VisibilityVolume v(Dims3{1, 1, 4});
  v.data = {Visibility::kVisibleFree, Visibility::kVisibleSurface, Visibility::kOccluded,
            Visibility::kOutsideFrustum};
  EXPECT_EQ(loss_mask(v, LossMask::kObserved).data, (std::vector<std::uint8_t>{0, 1, 1, 1}));
  EXPECT_EQ(loss_mask(v, LossMask::kAll).data, (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(Predict, DominantChannelAndTies) {
  Tensor<float> s(Shape{4, 2, 3, 2}, 0.0f);
  for (std::size_t v = 0; v < 12; ++v) s[2 * 12 + v] = 5.0f;
  for (auto l : predict_labels(s).data) EXPECT_EQ(l, 2);
  Tensor<float> tie(Shape{3, 1, 1, 1}, 1.0f);
  EXPECT_EQ(predict_labels(tie)[0], 0);
  tie[0] = 0.5f;
  EXPECT_EQ(predict_labels(tie)[0], 1);
}

TEST(Predict, ShiftInvariantAndMatchesExhaustiveArgmax) {
  std::mt19937_64 rng(61);
  auto s = test::random_tensor<double>({5, 3, 4, 3}, rng);
  const auto base = predict_labels(s);
  const std::size_t n = 36;
  std::uniform_real_distribution<double> shift(-10, 10);
  for (std::size_t v = 0; v < n; ++v) {
    const double k = shift(rng);
    for (std::size_t c = 0; c < 5; ++c) s[c * n + v] += k;
    std::size_t best = 0;
    for (std::size_t c = 0; c < 5; ++c)
      if (s[c * n + v] > s[best * n + v]) best = c;
    EXPECT_EQ(base[v], best);
  }
  EXPECT_EQ(predict_labels(s), base);
}

TEST(Strategy, ValidityRules) {
  auto net = build_mid_fusion(tiny_cfg());
  const auto donor = build_depth_net(tiny_cfg());
  EXPECT_THROW(apply_strategy<float>(net, Strategy::kFineTuning, nullptr, 1), UsageError);
  EXPECT_THROW(apply_strategy(net, Strategy::kSurgery, &donor, 1), UsageError);
  auto early = build_early_fusion(tiny_cfg());
  EXPECT_NO_THROW(apply_strategy(early, Strategy::kSurgery, &donor, 1));
  EXPECT_THROW(parse_strategy("transfer"), UsageError);
}

TEST(Strategy, FlagsPerStrategy) {
  auto donor = build_depth_net(tiny_cfg());
  init_params(donor, 99);
  auto mid = build_mid_fusion(tiny_cfg());
  const auto fl = apply_strategy(mid, Strategy::kFeatureLearning, &donor, 1);
  for (const auto& n : fl.donor_blocks) {
    EXPECT_FALSE(mid.block(n).trainable) << n;
    EXPECT_EQ(mid.block(n).weight, donor.block(n).weight);
  }
  for (const auto& n : fl.new_blocks) EXPECT_TRUE(mid.block(n).trainable);
  // the colour branch and the first head (wider concat) are new
  EXPECT_NE(std::find(fl.new_blocks.begin(), fl.new_blocks.end(), "c_conv1"), fl.new_blocks.end());
  EXPECT_NE(std::find(fl.new_blocks.begin(), fl.new_blocks.end(), "head1"), fl.new_blocks.end());
  EXPECT_NE(std::find(fl.donor_blocks.begin(), fl.donor_blocks.end(), "head2"), fl.donor_blocks.end());

  const auto ft = apply_strategy(mid, Strategy::kFineTuning, &donor, 1);
  for (const auto& n : ft.donor_blocks) {
    EXPECT_TRUE(mid.block(n).trainable);
    EXPECT_EQ(mid.block(n).lr_ratio, 0.2);
  }
  for (const auto& n : ft.new_blocks) EXPECT_EQ(mid.block(n).lr_ratio, 1.0);

  apply_strategy<float>(mid, Strategy::kRandomInit, nullptr, 1);
  for (const auto& [name, b] : mid.params()) {
    EXPECT_TRUE(b.trainable);
    EXPECT_EQ(b.lr_ratio, 1.0);
  }
  EXPECT_EQ(mid.block("conv2").weight, build_mid_fusion(tiny_cfg()).block("conv2").weight);

  auto early = build_early_fusion(tiny_cfg());
  const auto su = apply_strategy(early, Strategy::kSurgery, &donor, 1);
  EXPECT_EQ(su.new_blocks, std::vector<std::string>{"conv1"});
  EXPECT_EQ(early.block("conv1").lr_ratio, 1.0);
  EXPECT_EQ(early.block("conv3a").lr_ratio, 0.2);
  EXPECT_EQ(early.block("conv1").bias, donor.block("conv1").bias);
}

TEST(Trainer, FeatureLearningFreezesDonorBlocks) {
  const auto data = tiny_examples(2, Variant::kMid);
  auto donor = build_depth_net(tiny_cfg());
  init_params(donor, 5);
  auto net = build_mid_fusion(tiny_cfg());
  const auto r = apply_strategy(net, Strategy::kFeatureLearning, &donor, 2);
  HyperParams hp;
  hp.iterations = 25;
  hp.lr = 0.003;
  const auto before = net.block("head3").weight;
  train(net, data, hp);
  for (const auto& n : r.donor_blocks) {
    EXPECT_EQ(net.block(n).weight, donor.block(n).weight) << n;
    EXPECT_EQ(net.block(n).bias, donor.block(n).bias) << n;
  }
  EXPECT_FALSE(net.block("c_conv1").weight == build_mid_fusion(tiny_cfg()).block("c_conv1").weight);
  EXPECT_EQ(net.block("head3").weight, before);  // head3 matches the donor, so frozen too
}

TEST(Trainer, FineTuningStepIsPointTwoOfTheRate) {
  const auto data = tiny_examples<double>(1, Variant::kEarly);
  auto donor = build_depth_net<double>(tiny_cfg());
  init_params(donor, 5);
  auto net = build_early_fusion<double>(tiny_cfg());
  apply_strategy(net, Strategy::kFineTuning, &donor, 2);
  const auto st = forward_train(net, data[0].input);
  const auto loss = softmax_cross_entropy(st.scores(), data[0].labels, data[0].loss);
  const auto g = backward(net, st, loss.grad);
  const auto before = net;
  HyperParams hp;
  hp.iterations = 1;
  hp.momentum = 0;
  hp.lr = 0.01;
  train(net, data, hp);
  for (const char* name : {"conv3a", "head2"}) {
    const auto& w0 = before.block(name).weight;
    const auto& w1 = net.block(name).weight;
    const auto& gw = g.blocks.at(name).weight;
    double worst = 0, moved = 0;
    for (std::size_t i = 0; i < w0.size(); ++i) {
      worst = std::max(worst, std::abs((w1[i] - w0[i]) - (-0.2 * 0.01 * gw[i])));
      moved = std::max(moved, std::abs(w1[i] - w0[i]));
    }
    EXPECT_LT(worst, 1e-9) << name;
    EXPECT_GT(moved, 0.0) << name;
  }
  // conv1 is new in early fusion (4 input channels) and moves at the full rate
  const auto& c0 = before.block("conv1").weight;
  const auto& c1 = net.block("conv1").weight;
  const auto& gc = g.blocks.at("conv1").weight;
  for (std::size_t i = 0; i < c0.size(); ++i) ASSERT_NEAR(c1[i] - c0[i], -0.01 * gc[i], 1e-12);
}

TEST(Trainer, RatioZeroReproducesFeatureLearning) {
  const auto data = tiny_examples(2, Variant::kEarly);
  auto donor = build_depth_net(tiny_cfg());
  init_params(donor, 5);
  HyperParams hp;
  hp.iterations = 12;
  hp.lr = 0.003;
  auto a = build_early_fusion(tiny_cfg());
  apply_strategy(a, Strategy::kFeatureLearning, &donor, 2);
  auto b = build_early_fusion(tiny_cfg());
  apply_strategy(b, Strategy::kFineTuning, &donor, 2, 0.0);
  EXPECT_EQ(train(a, data, hp), train(b, data, hp));
  for (const auto& [name, blk] : a.params()) EXPECT_EQ(blk.weight, b.block(name).weight) << name;
}

TEST(Trainer, SameSeedSameHistory) {
  const auto data = tiny_examples(3, Variant::kDepth);
  HyperParams hp;
  hp.iterations = 10;
  hp.batch = 2;
  auto a = build_depth_net(tiny_cfg());
  auto b = build_depth_net(tiny_cfg());
  const auto ha = train(a, data, hp);
  EXPECT_EQ(ha, train(b, data, hp));
  for (const auto& [name, blk] : a.params()) EXPECT_EQ(blk.weight, b.block(name).weight) << name;
  auto c = build_depth_net(tiny_cfg());
  hp.seed = 2;
  EXPECT_NE(ha, train(c, data, hp));
}

TEST(Trainer, ZeroRateChangesNothing) {
  const auto data = tiny_examples(1, Variant::kColour);
  auto net = build_colour_only(tiny_cfg());
  const auto before = net;
  HyperParams hp;
  hp.iterations = 5;
  hp.lr = 0;
  const auto h = train(net, data, hp);
  for (const auto& r : h) EXPECT_EQ(r.loss, h[0].loss);
  for (const auto& [name, blk] : net.params()) EXPECT_EQ(blk.weight, before.block(name).weight);
}

TEST(Trainer, OneSampleOverfitLowersLoss) {
  const auto data = tiny_examples(1, Variant::kDepth);
  auto net = build_depth_net(tiny_cfg());
  HyperParams hp;
  hp.iterations = 200;
  hp.lr = 0.003;
  const auto h = train(net, data, hp);
  EXPECT_LT(h.back().loss, h.front().loss);
}

TEST(Trainer, NonFiniteLossNamesIterationAndSample) {
  auto data = tiny_examples(2, Variant::kDepth);
  for (float& x : data[1].input.values()) x = std::numeric_limits<float>::quiet_NaN();
  auto net = build_depth_net(tiny_cfg());
  HyperParams hp;
  hp.iterations = 4;
  try {
    train(net, data, hp);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("iteration"), std::string::npos);
    EXPECT_NE(what.find(data[1].id), std::string::npos) << what;
  }
}

TEST(Trainer, RejectsBadInputs) {
  const auto data = tiny_examples(1, Variant::kDepth);
  auto net = build_depth_net(tiny_cfg());
  HyperParams hp;
  hp.iterations = 0;
  EXPECT_THROW(train(net, data, hp), UsageError);
  hp.iterations = 1;
  EXPECT_THROW(train(net, std::vector<Example<float>>{}, hp), DataError);
  auto early = build_early_fusion(tiny_cfg());
  EXPECT_THROW(train(early, data, hp), ShapeError);
  hp.class_weights = {1, 2};
  EXPECT_THROW(train(net, data, hp), UsageError);
}

TEST(Trainer, CheckpointsAndHistoryCsv) {
  const auto data = tiny_examples(1, Variant::kDepth);
  auto net = build_depth_net(tiny_cfg());
  HyperParams hp;
  hp.iterations = 7;
  hp.checkpoint_every = 3;
  std::vector<std::size_t> saved;
  TrainHooks<float> hooks;
  hooks.checkpoint = [&](std::size_t it, const NetworkGraph<float>&) { saved.push_back(it); };
  const auto h = train(net, data, hp, hooks);
  EXPECT_EQ(saved, (std::vector<std::size_t>{3, 6}));
  std::ostringstream os;
  write_history_csv(os, h);
  std::istringstream is(os.str());
  std::string line;
  std::size_t rows = 0;
  std::getline(is, line);
  EXPECT_EQ(line, "iteration,loss,completion_iou,mean_semantic_iou");
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 7u);
}

TEST(Trainer, EpochOrderIsAPermutation) {
  for (std::size_t e = 0; e < 5; ++e) {
    auto o = epoch_order(9, 4, e);
    std::sort(o.begin(), o.end());
    for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(o[i], i);
  }
  EXPECT_NE(epoch_order(9, 4, 0), epoch_order(9, 4, 1));
}

}  // namespace
}  // namespace ssc
