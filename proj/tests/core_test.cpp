#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ssc/core/activation.hpp"
#include "ssc/core/concat.hpp"
#include "ssc/core/conv3d.hpp"
#include "ssc/core/grad_check.hpp"
#include "ssc/core/loss.hpp"
#include "ssc/core/pooling.hpp"
#include "ssc/core/sgd.hpp"
#include "ssc/core/vxt_io.hpp"
#include "ssc/testing/oracles.hpp"
#include "test_util.hpp"

namespace ssc {
namespace {

using test::dot;
using test::random_tensor;

TEST(Conv3d, IdentityKernel) {
  Tensor<double> in(Shape{1, 1, 1, 1}, 5.0);
  Tensor<double> w(Shape{1, 1, 1, 1, 1}, 1.0);
  Tensor<double> b(Shape{1}, 0.0);
  const auto out = conv3d_forward(in, w, b, ConvSpec::cube(1, 1, 1));
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(out[0], 5.0);
}

TEST(Conv3d, ZeroWeightsGiveBias) {
  std::mt19937_64 rng(1);
  const auto in = random_tensor<double>({2, 5, 4, 3}, rng);
  const ConvSpec spec = ConvSpec::cube(2, 3, 3, 1, 1);
  Tensor<double> w(spec.weight_shape(), 0.0);
  Tensor<double> b(Shape{3}, std::vector<double>{0.5, -1.0, 2.0});
  const auto out = conv3d_forward(in, w, b, spec);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < 60; ++k) EXPECT_EQ(out[c * 60 + k], b[c]);
}

TEST(Conv3d, MatchesNaiveLoopStridedDilated) {
  std::mt19937_64 rng(2);
  const ConvSpec spec = ConvSpec::cube(2, 3, 3, 2, 1, 2);
  const auto in = random_tensor<double>({2, 6, 6, 6}, rng);
  const auto w = random_tensor<double>(spec.weight_shape(), rng);
  const auto b = random_tensor<double>({3}, rng);
  const auto out = conv3d_forward(in, w, b, spec);
  const auto ref = testing::naive_conv3d(in, w, b, spec);
  ASSERT_EQ(out.shape(), ref.shape());
  EXPECT_LT(max_abs_diff(out, ref), 1e-6);
}

TEST(Conv3d, AnisotropicMatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  ConvSpec spec{3, 2, {3, 1, 2}, {1, 2, 1}, {1, 0, 2}, {2, 1, 3}};
  const auto in = random_tensor<float>({3, 7, 5, 8}, rng);
  const auto w = random_tensor<float>(spec.weight_shape(), rng);
  const auto b = random_tensor<float>({2}, rng);
  EXPECT_LT(max_abs_diff(conv3d_forward(in, w, b, spec),
                         testing::naive_conv3d(in, w, b, spec)),
            1e-5f);
}

TEST(Conv3d, ShapeErrorsNameTheAxis) {
  Tensor<float> in(Shape{1, 2, 8, 8});
  const ConvSpec spec = ConvSpec::cube(1, 1, 3);
  Tensor<float> w(spec.weight_shape()), b(Shape{1});
  try {
    conv3d_forward(in, w, b, spec);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("depth"), std::string::npos);
  }
  Tensor<float> in2(Shape{2, 4, 4, 4});
  try {
    conv3d_forward(in2, w, b, spec);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos);
  }
  Tensor<float> bad_bias(Shape{2});
  EXPECT_THROW(conv3d_forward(Tensor<float>(Shape{1, 4, 4, 4}), w, bad_bias, spec),
               ShapeError);
}

TEST(Conv3d, DilatedKernelTouchesPredictedPositions) {
  // Single-voxel perturbation: an output depends on input position p iff p
  // lies on the dilated sampling lattice of its window.
  const ConvSpec spec = ConvSpec::cube(1, 1, 3, 1, 0, 2);
  EXPECT_EQ(spec.extent(0), 5);
  Tensor<double> w(spec.weight_shape(), 1.0), b(Shape{1}, 0.0);
  Tensor<double> base(Shape{1, 7, 7, 7}, 0.0);
  const auto ref = conv3d_forward(base, w, b, spec);
  ASSERT_EQ(ref.shape(), (Shape{1, 3, 3, 3}));
  for (std::size_t z = 0; z < 7; ++z)
    for (std::size_t y = 0; y < 7; ++y)
      for (std::size_t x = 0; x < 7; ++x) {
        Tensor<double> in = base;
        in.at(0, z, y, x) = 1.0;
        const auto out = conv3d_forward(in, w, b, spec);
        // output (0,0,0) samples offsets {0,2,4} per axis
        const bool expect = z % 2 == 0 && y % 2 == 0 && x % 2 == 0 && z <= 4 &&
                            y <= 4 && x <= 4;
        EXPECT_EQ(out[0] != 0.0, expect) << z << "," << y << "," << x;
      }
}

TEST(Conv3dBackward, ZeroGradOut) {
  std::mt19937_64 rng(4);
  const ConvSpec spec = ConvSpec::cube(2, 2, 3, 1, 1);
  const auto in = random_tensor<double>({2, 4, 4, 4}, rng);
  const auto w = random_tensor<double>(spec.weight_shape(), rng);
  Tensor<double> g(Shape{2, 4, 4, 4}, 0.0);
  const auto grads = conv3d_backward(in, w, spec, g);
  for (double v : grads.input.values()) EXPECT_EQ(v, 0.0);
  for (double v : grads.weights.values()) EXPECT_EQ(v, 0.0);
  for (double v : grads.bias.values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv3dBackward, IdentityCase) {
  Tensor<double> in(Shape{1, 1, 1, 1}, 5.0);
  Tensor<double> w(Shape{1, 1, 1, 1, 1}, 1.0);
  Tensor<double> g(Shape{1, 1, 1, 1}, 1.0);
  const auto grads = conv3d_backward(in, w, ConvSpec::cube(1, 1, 1), g);
  EXPECT_EQ(grads.input[0], 1.0);
  EXPECT_EQ(grads.weights[0], 5.0);
  EXPECT_EQ(grads.bias[0], 1.0);
}

TEST(Conv3dBackward, RejectsGradShapeMismatch) {
  const ConvSpec spec = ConvSpec::cube(1, 1, 3, 1, 1);
  Tensor<double> in(Shape{1, 4, 4, 4}), w(spec.weight_shape());
  EXPECT_THROW(conv3d_backward(in, w, spec, Tensor<double>(Shape{1, 3, 4, 4})),
               ShapeError);
}

TEST(Conv3dBackward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const ConvSpec spec = ConvSpec::cube(2, 2, 3, 2, 1, 2);
  auto in = random_tensor<double>({2, 4, 4, 4}, rng);
  auto w = random_tensor<double>(spec.weight_shape(), rng);
  auto b = random_tensor<double>({2}, rng);
  const auto out = conv3d_forward(in, w, b, spec);
  const auto r = random_tensor<double>(out.shape(), rng);
  const auto grads = conv3d_backward(in, w, spec, r);

  auto f_in = [&](const std::vector<double>& x) {
    return dot(conv3d_forward(Tensor<double>(in.shape(), x), w, b, spec), r);
  };
  EXPECT_TRUE(grad_check(f_in, in.storage(), grads.input.storage(), 1e-4).passed(1e-5));
  auto f_w = [&](const std::vector<double>& x) {
    return dot(conv3d_forward(in, Tensor<double>(w.shape(), x), b, spec), r);
  };
  EXPECT_TRUE(grad_check(f_w, w.storage(), grads.weights.storage(), 1e-4).passed(1e-5));
  auto f_b = [&](const std::vector<double>& x) {
    return dot(conv3d_forward(in, w, Tensor<double>(b.shape(), x), spec), r);
  };
  EXPECT_TRUE(grad_check(f_b, b.storage(), grads.bias.storage(), 1e-4).passed(1e-5));
}

TEST(Relu, ForwardAndBackward) {
  Tensor<double> x(Shape{3}, std::vector<double>{-1, 0, 2});
  EXPECT_EQ(relu(x).storage(), (std::vector<double>{0, 0, 2}));
  Tensor<double> g(Shape{3}, std::vector<double>{5, 6, 7});
  EXPECT_EQ(relu_backward(x, g).storage(), (std::vector<double>{0, 0, 7}));
}

TEST(Relu, FiniteDifferencesAwayFromKink) {
  std::mt19937_64 rng(6);
  auto x = random_tensor<double>({2, 3, 3, 3}, rng);
  for (auto& v : x.storage()) v += v >= 0 ? 0.01 : -0.01;  // |x| > 10 * step
  const auto r = random_tensor<double>(x.shape(), rng);
  const auto g = relu_backward(x, r);
  auto f = [&](const std::vector<double>& v) { return dot(relu(Tensor<double>(x.shape(), v)), r); };
  EXPECT_TRUE(grad_check(f, x.storage(), g.storage(), 1e-4).passed(1e-5));
}

TEST(MaxPool, ConstantVolume) {
  Tensor<float> x(Shape{2, 4, 4, 4}, 3.5f);
  const auto r = maxpool3d(x, PoolSpec{});
  ASSERT_EQ(r.output.shape(), (Shape{2, 2, 2, 2}));
  for (float v : r.output.values()) EXPECT_EQ(v, 3.5f);
  // all tied: lowest linear index of each window
  EXPECT_EQ(r.argmax[0], 0u);
  EXPECT_EQ(r.argmax[1], 2u);
}

TEST(MaxPool, RampPicksLastElementOfWindow) {
  Tensor<float> x(Shape{1, 4, 4, 4});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(i);
  const auto r = maxpool3d(x, PoolSpec{});
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t xx = 0; xx < 2; ++xx) {
        const std::size_t last = x.offset(0, 2 * z + 1, 2 * y + 1, 2 * xx + 1);
        EXPECT_EQ(r.output.at(0, z, y, xx), x[last]);
        EXPECT_EQ(r.argmax[r.output.offset(0, z, y, xx)], last);
      }
}

TEST(MaxPool, MatchesNaiveLoop) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const PoolSpec spec{{2, 3, 2}, {2, 1, 3}};
    const auto x = random_tensor<double>({2, 5, 6, 7}, rng);
    EXPECT_EQ(maxpool3d(x, spec).output, testing::naive_maxpool3d(x, spec));
  }
}

TEST(MaxPool, RejectsOversizedWindow) {
  Tensor<float> x(Shape{1, 4, 4, 1});
  EXPECT_THROW(maxpool3d(x, PoolSpec{}), ShapeError);
}

TEST(MaxPool, BackwardRoutesToArgmax) {
  std::mt19937_64 rng(8);
  auto x = random_tensor<double>({2, 4, 4, 4}, rng);
  const auto r = maxpool3d(x, PoolSpec{});
  const auto go = random_tensor<double>(r.output.shape(), rng);
  const auto g = maxpool3d_backward(x.shape(), r.argmax, go);
  auto f = [&](const std::vector<double>& v) {
    return dot(maxpool3d(Tensor<double>(x.shape(), v), PoolSpec{}).output, go);
  };
  EXPECT_TRUE(grad_check(f, x.storage(), g.storage(), 1e-4).passed(1e-5));
}

TEST(Concat, TwoInputs) {
  Tensor<float> a(Shape{1, 2, 2, 2}, 1.f), b(Shape{1, 2, 2, 2}, 2.f);
  const auto c = concat_channels(std::vector<const Tensor<float>*>{&a, &b});
  ASSERT_EQ(c.shape(), (Shape{2, 2, 2, 2}));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(c[i], 1.f);
    EXPECT_EQ(c[8 + i], 2.f);
  }
}

TEST(Concat, SingleInputIsIdentity) {
  std::mt19937_64 rng(9);
  const auto a = random_tensor<float>({3, 2, 3, 4}, rng);
  EXPECT_EQ(concat_channels(std::vector<const Tensor<float>*>{&a}), a);
}

TEST(Concat, SpatialMismatchRejected) {
  Tensor<float> a(Shape{1, 2, 2, 2}), b(Shape{1, 2, 2, 3});
  EXPECT_THROW(concat_channels(std::vector<const Tensor<float>*>{&a, &b}), ShapeError);
  EXPECT_THROW(concat_channels<float>(std::vector<const Tensor<float>*>{}), ShapeError);
}

TEST(Concat, SplitInvertsConcatForAnyList) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<int> n(1, 4), c(1, 3), s(1, 4);
    const std::size_t d = s(rng), h = s(rng), w = s(rng);
    std::vector<Tensor<double>> parts;
    std::vector<std::size_t> channels;
    const int count = n(rng);
    for (int i = 0; i < count; ++i) {
      channels.push_back(c(rng));
      parts.push_back(random_tensor<double>({channels.back(), d, h, w}, rng));
    }
    EXPECT_EQ(split_channels(concat_channels(parts), channels), parts);
  }
}

MaskVolume full_mask(Dims3 d) { return MaskVolume(d, 1); }

TEST(SoftmaxCrossEntropy, UniformTwoClass) {
  Tensor<double> s(Shape{2, 1, 1, 1}, 0.0);
  LabelVolume l(Dims3{1, 1, 1}, 0);
  const auto r = softmax_cross_entropy(s, l, full_mask(l.dims));
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
  EXPECT_NEAR(r.grad[0], -0.5, 1e-12);
  EXPECT_NEAR(r.grad[1], 0.5, 1e-12);
}

TEST(SoftmaxCrossEntropy, GradScalesWithClassCount) {
  Tensor<double> s(Shape{2, 1, 1, 4}, 0.0);
  LabelVolume l(Dims3{1, 1, 4}, 0);
  const auto r = softmax_cross_entropy(s, l, full_mask(l.dims));
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
  EXPECT_NEAR(r.grad[0], -0.5 / 4, 1e-12);
  EXPECT_NEAR(r.grad[4], 0.5 / 4, 1e-12);
}

TEST(SoftmaxCrossEntropy, MaskedVoxelContributesNothing) {
  Tensor<double> s(Shape{2, 1, 1, 2}, std::vector<double>{0, 100, 0, -100});
  LabelVolume l(Dims3{1, 1, 2}, 0);
  l[1] = 1;
  MaskVolume m(l.dims, 1);
  m[1] = 0;
  const auto r = softmax_cross_entropy(s, l, m);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
  EXPECT_EQ(r.grad[1], 0.0);
  EXPECT_EQ(r.grad[3], 0.0);
}

TEST(SoftmaxCrossEntropy, EmptyMaskAndAbsentClasses) {
  std::mt19937_64 rng(11);
  const auto s = random_tensor<double>({3, 2, 2, 2}, rng);
  LabelVolume l(Dims3{2, 2, 2}, 1);
  const auto r = softmax_cross_entropy(s, l, MaskVolume(l.dims, 0));
  EXPECT_EQ(r.loss, 0.0);
  for (double g : r.grad.values()) EXPECT_EQ(g, 0.0);
  const auto r2 = softmax_cross_entropy(s, l, full_mask(l.dims));
  EXPECT_TRUE(std::isfinite(r2.loss));
}

TEST(SoftmaxCrossEntropy, RejectsOutOfRangeLabel) {
  Tensor<double> s(Shape{2, 1, 1, 1});
  LabelVolume l(Dims3{1, 1, 1}, 2);
  EXPECT_THROW(softmax_cross_entropy(s, l, full_mask(l.dims)), ShapeError);
}

TEST(SoftmaxCrossEntropy, MatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  auto s = random_tensor<double>({3, 4, 4, 4}, rng, -2, 2);
  LabelVolume l(Dims3{4, 4, 4});
  MaskVolume m(l.dims);
  std::uniform_int_distribution<int> cls(0, 2), bit(0, 3);
  for (std::size_t i = 0; i < l.size(); ++i) {
    l[i] = static_cast<std::uint16_t>(cls(rng));
    m[i] = bit(rng) != 0;
  }
  const std::vector<double> weights{1.0, 0.5, 2.0};
  const auto r = softmax_cross_entropy(s, l, m, weights);
  auto f = [&](const std::vector<double>& v) {
    return softmax_cross_entropy(Tensor<double>(s.shape(), v), l, m, weights).loss;
  };
  EXPECT_TRUE(grad_check(f, s.storage(), r.grad.storage(), 1e-4).passed(1e-5));
}

TEST(SoftmaxCrossEntropy, ShiftInvariant) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_tensor<double>({4, 2, 3, 2}, rng, -3, 3);
    LabelVolume l(Dims3{2, 3, 2});
    std::uniform_int_distribution<int> cls(0, 3);
    for (auto& v : l.data) v = static_cast<std::uint16_t>(cls(rng));
    const double base = softmax_cross_entropy(s, l, full_mask(l.dims)).loss;
    std::uniform_real_distribution<double> shift(-50, 50);
    const std::size_t n = l.size();
    for (std::size_t v = 0; v < n; ++v) {
      const double k = shift(rng);
      for (std::size_t c = 0; c < 4; ++c) s[c * n + v] += k;
    }
    EXPECT_NEAR(softmax_cross_entropy(s, l, full_mask(l.dims)).loss, base, 1e-9);
  }
}

TEST(Sgd, PlainStep) {
  Tensor<double> p(Shape{1}, 1.0), g(Shape{1}, 2.0), v;
  sgd_step(p, g, v, 0.1, 0.0, 1.0);
  EXPECT_NEAR(p[0], 0.8, 1e-15);
}

TEST(Sgd, ReducedRatio) {
  Tensor<double> p(Shape{1}, 1.0), g(Shape{1}, 2.0), v;
  sgd_step(p, g, v, 0.1, 0.0, 0.2);
  EXPECT_NEAR(p[0], 0.96, 1e-15);
}

TEST(Sgd, MomentumMatchesUnrolledRecurrence) {
  Tensor<double> p(Shape{1}, 1.0), v;
  sgd_step(p, Tensor<double>(Shape{1}, 2.0), v, 0.1, 0.9, 1.0);
  sgd_step(p, Tensor<double>(Shape{1}, -1.0), v, 0.1, 0.9, 1.0);
  // v1 = -0.2, p1 = 0.8; v2 = 0.9 * -0.2 + 0.1 = -0.08, p2 = 0.72
  EXPECT_NEAR(v[0], -0.08, 1e-15);
  EXPECT_NEAR(p[0], 0.72, 1e-15);
}

TEST(GradCheck, LinearFunctionIsExact) {
  std::vector<double> x{1.0, -2.0, 3.5};
  const std::vector<double> a{3.0, -1.0, 0.25};
  auto f = [&](const std::vector<double>& v) {
    return 3.0 * v[0] - v[1] + 0.25 * v[2];
  };
  const auto r = grad_check(f, x, a, 1e-4);
  EXPECT_LT(r.max_rel_error, 1e-10);
  EXPECT_EQ(x, (std::vector<double>{1.0, -2.0, 3.5}));
}

TEST(GradCheck, NonFiniteIsFailure) {
  std::vector<double> x{0.0};
  auto f = [](const std::vector<double>& v) { return 1.0 / v[0]; };
  const auto r = grad_check(f, x, std::vector<double>{1.0}, 1e-4);
  EXPECT_FALSE(r.passed(1e-5));
  std::vector<double> y{1.0};
  auto g = [](const std::vector<double>& v) { return std::log(v[0] - 1.0); };
  EXPECT_FALSE(grad_check(g, y, std::vector<double>{1.0}, 1e-4).finite);
}

TEST(GradCheck, DetectsWrongGradient) {
  std::vector<double> x{1.0, 2.0};
  auto f = [](const std::vector<double>& v) { return v[0] * v[1]; };
  EXPECT_FALSE(grad_check(f, x, std::vector<double>{2.0, -1.0}, 1e-4).passed(1e-5));
}

TEST(Vxt, RoundTripBothDtypes) {
  std::mt19937_64 rng(14);
  const auto a = random_tensor<float>({2, 3, 4}, rng);
  std::stringstream ss;
  write_vxt(ss, a);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 2 + 3 * 4 + 24 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "VXT1");
  EXPECT_EQ(bytes[4], 0);
  EXPECT_EQ(bytes[5], 3);
  EXPECT_EQ(bytes[6], 2);  // first dim, little-endian
  EXPECT_EQ(read_vxt<float>(ss), a);

  const auto d = random_tensor<double>({5}, rng);
  std::stringstream s2;
  write_vxt(s2, d);
  EXPECT_EQ(s2.str()[4], 1);
  EXPECT_EQ(read_vxt<double>(s2), d);
}

TEST(Vxt, RejectsBadMagicAndTruncation) {
  std::stringstream bad("VXT2\0\1\1\0\0\0");
  EXPECT_THROW(read_vxt<float>(bad), DataError);
  Tensor<float> t(Shape{4}, 1.f);
  std::stringstream ss;
  write_vxt(ss, t);
  std::string s = ss.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(read_vxt<float>(cut), DataError);
}

}  // namespace
}  // namespace ssc
