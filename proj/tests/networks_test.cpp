#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "ssc/networks/builders.hpp"
#include "ssc/networks/execute.hpp"
#include "ssc/networks/model_io.hpp"
#include "ssc/networks/receptive_field.hpp"
#include "ssc/networks/surgery.hpp"
#include "ssc/testing/graph_check.hpp"
#include "ssc/testing/oracles.hpp"
#include "test_util.hpp"

namespace ssc {
namespace {

NetConfig small_cfg(double width = 0.25, Dims3 grid = {16, 8, 16}) {
  NetConfig c;
  c.grid = grid;
  c.width = width;
  return c;
}

std::vector<std::pair<int, int>> dilated_pairs(const NetworkGraph<float>& net, const std::string& prefix) {
  std::vector<std::pair<int, int>> out;
  for (const auto& l : net.layers())
    if (l.kind == LayerKind::kConv && l.conv.dilation[0] > 1 && l.name.rfind(prefix, 0) == 0)
      out.emplace_back(l.conv.kernel[0], l.conv.dilation[0]);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t convs_with_prefix(const NetworkGraph<float>& net, const std::string& prefix, bool want) {
  std::size_t n = 0;
  for (const auto& name : net.conv_layers())
    if (name.rfind("head", 0) != 0 && (name.rfind(prefix, 0) == 0) == want) ++n;
  return n;
}

TEST(Builders, DefaultDepthNetShape) {
  const auto net = build_depth_net(NetConfig{});
  EXPECT_NO_THROW(net.validate());
  EXPECT_EQ(net.output_shape(), (Shape{12, 16, 8, 16}));
  EXPECT_EQ(net.input_shape(), (Shape{1, 64, 32, 64}));
}

TEST(Builders, RejectsBadConfigs) {
  NetConfig c = small_cfg();
  c.width = 0;
  EXPECT_THROW(build_depth_net(c), ShapeError);
  c = small_cfg(0.25, {16, 10, 16});
  EXPECT_THROW(build_mid_fusion(c), ShapeError);
  c = small_cfg();
  c.classes = 1;
  EXPECT_THROW(build_colour_only(c), ShapeError);
}

TEST(Builders, AllVariantsQuarterResolution) {
  for (Dims3 g : {Dims3{16, 8, 16}, Dims3{32, 16, 8}, Dims3{8, 8, 12}})
    for (Variant v : {Variant::kDepth, Variant::kEarly, Variant::kMid, Variant::kColour}) {
      NetConfig c = small_cfg(0.25, g);
      c.classes = 5;
      const auto net = build_network(v, c);
      EXPECT_NO_THROW(net.validate());
      EXPECT_EQ(net.output_shape(), (Shape{5, g.d / 4, g.h / 4, g.w / 4})) << variant_name(v);
      EXPECT_EQ(net.input_shape()[0], input_channels(v));
      Tensor<float> x(net.input_shape(), 0.5f);
      EXPECT_EQ(forward(net, x).shape(), net.output_shape());
    }
}

TEST(Builders, WithoutResidualsHasNoAddLayers) {
  NetConfig c = small_cfg();
  c.residual = false;
  const auto net = build_mid_fusion(c);
  for (const auto& l : net.layers()) EXPECT_NE(l.kind, LayerKind::kAdd) << l.name;
  EXPECT_EQ(net.output_shape(), (Shape{12, 4, 2, 4}));
}

TEST(Builders, DepthTrunkHasFiveScalesAndThreeHeads) {
  const auto net = build_depth_net(small_cfg());
  const auto& cat = net.layer(*net.find("concat"));
  EXPECT_EQ(cat.inputs.size(), 5u);
  std::size_t heads = 0;
  for (const auto& n : net.conv_layers()) heads += n.rfind("head", 0) == 0;
  EXPECT_EQ(heads, 3u);
  EXPECT_GE(dilated_pairs(net, "conv").size(), 2u);
}

TEST(Builders, EarlyFusionDiffersOnlyInFirstConv) {
  const NetConfig c = small_cfg(0.5);
  const auto d = build_depth_net(c);
  const auto e = build_early_fusion(c);
  ASSERT_EQ(d.size(), e.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    LayerSpec a = d.layer(i), b = e.layer(i);
    if (a.name == "conv1") {
      EXPECT_EQ(a.conv.in_channels, 1);
      EXPECT_EQ(b.conv.in_channels, 4);
      b.conv.in_channels = 1;
    }
    if (a.kind == LayerKind::kInput) b.end = a.end;
    EXPECT_EQ(a, b) << a.name;
  }
  const auto& c1 = d.layer(*d.find("conv1")).conv;
  EXPECT_EQ(e.parameter_count() - d.parameter_count(),
            3u * c1.out_channels * c1.kernel[0] * c1.kernel[1] * c1.kernel[2]);
  EXPECT_EQ(d.output_shape(), e.output_shape());
}

TEST(Builders, MidFusionColourBranchKeepsDilatedLayers) {
  const auto mid = build_mid_fusion(small_cfg());
  const auto depth_dil = dilated_pairs(mid, "conv");
  EXPECT_EQ(dilated_pairs(mid, "c_"), depth_dil);
  EXPECT_FALSE(depth_dil.empty());
  EXPECT_LT(convs_with_prefix(mid, "c_", true), convs_with_prefix(mid, "c_", false));
  EXPECT_EQ(mid.output_shape(), build_depth_net(small_cfg()).output_shape());
  EXPECT_EQ(mid.layer(*mid.find("concat")).inputs.size(), 9u);
  // the depth branch is the depth net's trunk, layer for layer
  const auto depth = build_depth_net(small_cfg());
  for (const auto& name : depth.conv_layers()) {
    if (name == "head1") continue;
    EXPECT_EQ(mid.block(name).weight.shape(), depth.block(name).weight.shape()) << name;
  }
}

TEST(Builders, ColourOnlySharesHeadsWithMidFusion) {
  const auto col = build_colour_only(small_cfg());
  const auto mid = build_mid_fusion(small_cfg());
  EXPECT_EQ(col.input_shape()[0], 3u);
  for (const auto& l : col.layers())
    if (l.kind == LayerKind::kInput) { EXPECT_NE(l.end, 1u); }
  for (const char* h : {"head1", "head2", "head3"}) {
    ConvSpec a = col.layer(*col.find(h)).conv, b = mid.layer(*mid.find(h)).conv;
    // head1 reads the concat, which has fewer scales without the depth branch
    if (std::string(h) == "head1") b.in_channels = a.in_channels;
    EXPECT_EQ(a, b) << h;
  }
  EXPECT_EQ(col.output_shape(), mid.output_shape());
}

TEST(Builders, SameSeedSameParams) {
  const auto a = build_mid_fusion(small_cfg());
  const auto b = build_mid_fusion(small_cfg());
  NetConfig other = small_cfg();
  other.seed = 2;
  const auto c = build_mid_fusion(other);
  for (const auto& [name, blk] : a.params()) {
    EXPECT_EQ(blk.weight, b.block(name).weight);
    EXPECT_FALSE(blk.weight == c.block(name).weight) << name;
  }
  // a block initialises identically in every network containing it
  EXPECT_EQ(a.block("conv3a").weight, build_depth_net(small_cfg()).block("conv3a").weight);
}

TEST(Graph, RejectsCyclesAndBadWiring) {
  NetworkGraph<float> g;
  g.input("in", 1);
  EXPECT_THROW(g.relu("r", 3), ShapeError);   // forward reference
  EXPECT_THROW(g.relu("in", 0), ShapeError);  // duplicate name
  EXPECT_THROW(g.input("in2", 1), ShapeError);
  EXPECT_THROW(g.sum("a", {0}), ShapeError);
  g.relu("r", 0);
  g.relu("dangling", 0);
  g.relu("out", 1);
  EXPECT_THROW(g.validate(), ShapeError);
}

TEST(Graph, InputShapeMismatchRejected) {
  const auto net = build_depth_net(small_cfg());
  EXPECT_THROW(forward(net, Tensor<float>(Shape{1, 16, 8, 12})), ShapeError);
  EXPECT_THROW(forward(net, Tensor<float>(Shape{4, 16, 8, 16})), ShapeError);
}

TEST(Graph, SingleConvMatchesKernel) {
  std::mt19937_64 rng(41);
  NetworkGraph<double> g;
  g.config.grid = {5, 6, 7};
  const ConvSpec s = ConvSpec::cube(2, 3, 3, 2, 1, 1);
  g.conv("c", g.input("in", 2), s);
  auto& b = g.block("c");
  b.weight = test::random_tensor<double>(s.weight_shape(), rng);
  b.bias = test::random_tensor<double>({3}, rng);
  const auto x = test::random_tensor<double>({2, 5, 6, 7}, rng);
  EXPECT_EQ(forward(g, x), conv3d_forward(x, b.weight, b.bias, s));
}

TEST(Graph, ThreeLayerGradCheck) {
  std::mt19937_64 rng(42);
  NetworkGraph<double> g;
  g.config.grid = {4, 4, 4};
  std::size_t x = g.input("in", 2);
  x = g.conv("c1", x, ConvSpec::cube(2, 3, 3, 1, 1));
  x = g.relu("r1", x);
  g.conv("c2", x, ConvSpec::cube(3, 2, 3, 1, 2, 2));
  init_params(g, 3);
  for (auto& kv : g.params()) kv.second.bias = test::random_tensor<double>(kv.second.bias.shape(), rng);
  const auto in = test::random_tensor<double>({2, 4, 4, 4}, rng);
  const auto r = testing::graph_grad_check(g, in, 1000, 5);
  EXPECT_TRUE(r.passed(1e-5)) << r.worst_block << " " << r.worst.max_rel_error;
}

TEST(Graph, FanOutGradientIsSumOfConsumers) {
  std::mt19937_64 rng(43);
  NetworkGraph<double> g;
  g.config.grid = {3, 3, 3};
  const std::size_t in = g.input("in", 1);
  const std::size_t c = g.conv("c", in, ConvSpec::cube(1, 2, 3, 1, 1));
  const std::size_t a = g.conv("a", c, ConvSpec::cube(2, 2, 1));
  const std::size_t b = g.conv("b", c, ConvSpec::cube(2, 2, 3, 1, 1));
  g.sum("out", {a, b});
  init_params(g, 9);
  const auto x = test::random_tensor<double>({1, 3, 3, 3}, rng);
  const auto st = forward_train(g, x);
  const auto r = test::random_tensor<double>(st.scores().shape(), rng);
  const auto grads = backward(g, st, r, true);
  // grad at c through each consumer separately
  const auto ga = conv3d_backward(st.outputs[c], g.block("a").weight, g.layer(a).conv, r);
  const auto gb = conv3d_backward(st.outputs[c], g.block("b").weight, g.layer(b).conv, r);
  Tensor<double> expect = ga.input;
  expect += gb.input;
  const auto gc = conv3d_backward(x, g.block("c").weight, g.layer(c).conv, expect);
  EXPECT_LT(max_abs_diff(grads.blocks.at("c").weight, gc.weights), 1e-12);
  EXPECT_LT(max_abs_diff(grads.input, gc.input), 1e-12);
}

TEST(Graph, WholeNetworkGradCheck) {
  std::mt19937_64 rng(44);
  for (Variant v : {Variant::kDepth, Variant::kMid}) {
    auto net = build_network<double>(v, small_cfg());
    for (auto& kv : net.params())
      kv.second.bias = test::random_tensor<double>(kv.second.bias.shape(), rng, -0.1, 0.1);
    const auto in = test::random_tensor<double>(net.input_shape(), rng);
    const auto r = testing::graph_grad_check(net, in, 6, 7, 1e-5);
    EXPECT_TRUE(r.passed(1e-5)) << variant_name(v) << " " << r.worst_block << " "
                                << r.worst.max_rel_error;
  }
}

TEST(Graph, CastPreservesForward) {
  std::mt19937_64 rng(45);
  const auto net = build_early_fusion<double>(small_cfg());
  const auto x = test::random_tensor<double>(net.input_shape(), rng);
  EXPECT_EQ(forward(net.cast<float>().cast<double>(), x).shape(), net.output_shape());
  EXPECT_LT(max_abs_diff(forward(net.cast<float>(), x.cast<float>()).cast<double>(), forward(net, x)),
            1e-4);
}

TEST(Surgery, CopiesDonorAndRandomisesColour) {
  std::mt19937_64 rng(46);
  auto donor = build_depth_net(small_cfg());
  init_params(donor, 77);
  auto net = build_early_fusion(small_cfg());
  surgery_init(net, donor, 5);
  const auto& w = net.block("conv1").weight;
  const auto& dw = donor.block("conv1").weight;
  const std::size_t taps = dw.size() / dw.dim(0);
  for (std::size_t co = 0; co < w.dim(0); ++co)
    for (std::size_t t = 0; t < taps; ++t) ASSERT_EQ(w[co * 4 * taps + t], dw[co * taps + t]);
  EXPECT_EQ(net.block("conv1").bias, donor.block("conv1").bias);
  for (const auto& [name, b] : donor.params()) {
    if (name == "conv1") continue;
    EXPECT_EQ(net.block(name).weight, b.weight) << name;
  }
  // a second seed changes only the colour kernels
  auto other = build_early_fusion(small_cfg());
  surgery_init(other, donor, 6);
  const auto& w2 = other.block("conv1").weight;
  bool colour_differs = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if ((i / taps) % 4 == 0) {
      ASSERT_EQ(w[i], w2[i]);
    } else {
      colour_differs |= w[i] != w2[i];
    }
  }
  EXPECT_TRUE(colour_differs);
}

TEST(Surgery, ZeroedColourMatchesDonor) {
  std::mt19937_64 rng(47);
  auto donor = build_depth_net<double>(small_cfg());
  for (auto& kv : donor.params())
    kv.second.bias = test::random_tensor<double>(kv.second.bias.shape(), rng, -0.1, 0.1);
  auto net = build_early_fusion<double>(small_cfg());
  surgery_init(net, donor, 3);
  zero_colour_slices(net);
  for (int trial = 0; trial < 3; ++trial) {
    const auto f = test::random_tensor<double>({1, 16, 8, 16}, rng);
    const auto c = test::random_tensor<double>({3, 16, 8, 16}, rng, -1, 1);
    const auto early = forward(net, concat_channels(std::vector<const Tensor<double>*>{&f, &c}));
    EXPECT_LT(max_abs_diff(early, forward(donor, f)), 1e-6);
  }
}

TEST(Surgery, RejectsMismatch) {
  const auto donor = build_depth_net(small_cfg(0.5));
  auto net = build_early_fusion(small_cfg(0.25));
  EXPECT_THROW(surgery_init(net, donor, 1), ShapeError);
  auto mid = build_mid_fusion(small_cfg());
  EXPECT_THROW(surgery_init(mid, build_depth_net(small_cfg()), 1), ShapeError);
  auto ok = build_early_fusion(small_cfg());
  EXPECT_THROW(surgery_init(ok, build_early_fusion(small_cfg()), 1), ShapeError);
}

TEST(ReceptiveField, SingleConvs) {
  NetworkGraph<float> g;
  g.config.grid = {9, 9, 9};
  g.conv("c", g.input("in", 1), ConvSpec::cube(1, 1, 3, 1, 1));
  const VoxelBox b = receptive_field(g, {4, 4, 4});
  EXPECT_EQ(b.extent(), (std::array<std::size_t, 3>{3, 3, 3}));
  EXPECT_EQ(b.lo, (std::array<std::size_t, 3>{3, 3, 3}));
  // clipped at the border
  EXPECT_EQ(receptive_field(g, {0, 0, 8}).extent(), (std::array<std::size_t, 3>{2, 2, 2}));

  NetworkGraph<float> d;
  d.config.grid = {9, 9, 9};
  d.conv("c", d.input("in", 1), ConvSpec::cube(1, 1, 3, 1, 2, 2));
  EXPECT_EQ(receptive_field(d, {4, 4, 4}).extent(), (std::array<std::size_t, 3>{5, 5, 5}));
}

TEST(ReceptiveField, MatchesPerturbationOnSmallNets) {
  std::mt19937_64 rng(48);
  for (Variant v : {Variant::kDepth, Variant::kMid}) {
    const auto net = build_network(v, small_cfg(0.25, {32, 16, 32}));
    const Shape o = net.output_shape();
    for (int k = 0; k < 3; ++k) {
      const std::array<std::size_t, 3> vox{rng() % o[1], rng() % o[2], rng() % o[3]};
      EXPECT_EQ(receptive_field(net, vox), testing::perturbation_receptive_field(net, vox));
    }
  }
}

TEST(ModelIo, SaveLoadSaveIsByteIdentical) {
  auto net = build_mid_fusion(small_cfg());
  net.block("conv2").trainable = false;
  net.block("head3").lr_ratio = 0.2;
  std::ostringstream a;
  write_model(a, net);
  std::istringstream in(a.str());
  const auto back = read_model<float>(in);
  std::ostringstream b;
  write_model(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.variant, Variant::kMid);
  EXPECT_EQ(back.config, net.config);
  EXPECT_FALSE(back.block("conv2").trainable);
  EXPECT_EQ(back.block("head3").lr_ratio, 0.2);
  std::mt19937_64 rng(49);
  const auto x = test::random_tensor<float>(net.input_shape(), rng);
  EXPECT_EQ(forward(back, x), forward(net, x));
}

TEST(ModelIo, RejectsCorruption) {
  const auto net = build_depth_net(small_cfg());
  std::ostringstream os;
  write_model(os, net);
  std::string bytes = os.str();
  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream m(bad);
  EXPECT_THROW(read_model<float>(m), DataError);
  std::istringstream t(bytes.substr(0, bytes.size() - 7));
  EXPECT_THROW(read_model<float>(t), DataError);
  std::istringstream extra(bytes + "z");
  EXPECT_THROW(read_model<float>(extra), DataError);
  EXPECT_THROW(load_model<float>("/nonexistent/model.sscm"), DataError);
}

}  // namespace
}  // namespace ssc
