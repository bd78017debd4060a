#include <gtest/gtest.h>

#include "support/grad_check.hpp"
#include "wcam/nn/layers.hpp"
#include "wcam/nn/transformer.hpp"

namespace wcam::nn {
namespace {

Tensor<double> random_tensor(Index n, Index c, Index h, Index w, std::uint64_t seed) {
  Tensor<double> t(n, c, h, w);
  Rng rng(seed);
  for (Index i = 0; i < t.numel(); ++i) t.data()[i] = rng.normal();
  return t;
}

// Direct six-loop convolution used as an oracle for the im2col path.
Tensor<double> naive_conv(const Tensor<double>& x, Conv2d<double>& conv, Index k, Index stride, Index pad) {
  const Index co = conv.out_channels(), ci = conv.in_channels();
  const Index ho = conv.output_size(x.h()), wo = conv.output_size(x.w());
  Tensor<double> y(x.n(), co, ho, wo);
  const auto& w = conv.weight().value;
  for (Index n = 0; n < x.n(); ++n)
    for (Index o = 0; o < co; ++o)
      for (Index oy = 0; oy < ho; ++oy)
        for (Index ox = 0; ox < wo; ++ox) {
          double acc = conv.bias().value[o];
          for (Index c = 0; c < ci; ++c)
            for (Index ky = 0; ky < k; ++ky)
              for (Index kx = 0; kx < k; ++kx) {
                const Index iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                if (iy < 0 || ix < 0 || iy >= x.h() || ix >= x.w()) continue;
                acc += w[((o * ci + c) * k + ky) * k + kx] * x.at(n, c, iy, ix);
              }
          y.at(n, o, oy, ox) = acc;
        }
  return y;
}

TEST(Conv2d, MatchesDirectConvolution) {
  for (auto [k, s, p] : {std::tuple{3, 1, 1}, std::tuple{3, 2, 1}, std::tuple{7, 7, 0}, std::tuple{1, 2, 0}}) {
    Conv2d<double> conv("c", 3, 4, k, s, p);
    Rng rng(11);
    conv.init(rng);
    conv.bias().value.setRandom();
    const auto x = random_tensor(2, 3, 15, 14, 3);
    const auto y = conv.forward(x, Mode::eval);
    const auto oracle = naive_conv(x, conv, k, s, p);
    ASSERT_EQ(y.shape(), oracle.shape());
    EXPECT_LT((y.data() - oracle.data()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Conv2d, Col2imIsAdjointOfIm2col) {
  const auto x = random_tensor(1, 2, 9, 8, 5);
  RowMatrix<double> col;
  im2col<double>(x.sample(0), 9, 8, 3, 2, 1, col);
  RowMatrix<double> a = RowMatrix<double>::Random(col.rows(), col.cols());
  Tensor<double> back(1, 2, 9, 8);
  col2im_add<double>(a, 9, 8, 3, 2, 1, back.sample(0));
  EXPECT_NEAR(a.cwiseProduct(col).sum(), back.data().dot(x.data()), 1e-10);
}

TEST(Conv2d, RejectsWrongChannelCount) {
  Conv2d<double> conv("c", 3, 4, 3, 1, 1);
  EXPECT_THROW(conv.forward(Tensor<double>(1, 2, 5, 5), Mode::eval), ShapeError);
}

TEST(Layers, ConvBnReluGradientsMatchFiniteDifferences) {
  ConvBnAct<double> unit("u", 3, 4, 3, 2, 1);
  Rng rng(2);
  unit.init(rng);
  ParameterList<double> params;
  unit.collect(params);
  ParameterList<double> trainable;
  for (auto* p : params)
    if (!p->buffer) trainable.push_back(p);
  const auto x = random_tensor(3, 3, 9, 9, 4);
  const auto target = random_tensor(3, 4, 5, 5, 6);
  auto loss = [&] {
    const auto y = unit.forward(x, Mode::train);
    return 0.5 * (y.data() - target.data()).squaredNorm();
  };
  zero_grads(params);
  const auto y = unit.forward(x, Mode::train);
  Tensor<double> dy(y.shape());
  dy.data() = y.data() - target.data();
  unit.backward(dy);
  std::vector<Vector<double>> analytic;
  for (auto* p : trainable) analytic.push_back(p->grad);
  const auto r = testing::finite_difference_check(trainable, analytic, loss, 12, 1e-5, 9);
  EXPECT_GE(r.pass_rate(), 0.95) << "worst " << r.worst;
}

TEST(Layers, ConvInputGradientMatchesFiniteDifferences) {
  Conv2d<double> conv("c", 2, 3, 3, 2, 1);
  Rng rng(1);
  conv.init(rng);
  auto x = random_tensor(1, 2, 7, 7, 8);
  const auto target = random_tensor(1, 3, 4, 4, 10);
  const auto y = conv.forward(x, Mode::train);
  Tensor<double> dy(y.shape());
  dy.data() = y.data() - target.data();
  const auto dx = conv.backward(dy);
  for (Index i = 0; i < x.numel(); i += 5) {
    const double saved = x.data()[i];
    x.data()[i] = saved + 1e-6;
    const double up = 0.5 * (conv.forward(x, Mode::eval).data() - target.data()).squaredNorm();
    x.data()[i] = saved - 1e-6;
    const double down = 0.5 * (conv.forward(x, Mode::eval).data() - target.data()).squaredNorm();
    x.data()[i] = saved;
    EXPECT_NEAR(dx.data()[i], (up - down) / 2e-6, 1e-6);
  }
}

TEST(BatchNorm2d, TrainModeNormalizesEvalModeUsesRunningStats) {
  BatchNorm2d<double> bn("bn", 2);
  auto x = random_tensor(4, 2, 5, 5, 12);
  x.data().array() = x.data().array() * 3.0 + 2.0;
  const auto y = bn.forward(x, Mode::train);
  for (Index c = 0; c < 2; ++c) {
    double sum = 0, sq = 0;
    for (Index n = 0; n < 4; ++n) {
      sum += y.sample(n).row(c).sum();
      sq += y.sample(n).row(c).squaredNorm();
    }
    EXPECT_NEAR(sum / 100, 0.0, 1e-12);
    EXPECT_NEAR(sq / 100, 1.0, 1e-3);
  }
  // A fresh layer in eval mode is the identity (running mean 0, var 1).
  BatchNorm2d<double> fresh("bn", 2);
  const auto e = fresh.forward(x, Mode::eval);
  EXPECT_LT((e.data() - x.data() / std::sqrt(1 + 1e-5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MaxPool2d, RoutesGradientToArgmax) {
  MaxPool2d<double> pool(2, 2, 0);
  Tensor<double> x(1, 1, 2, 2);
  x.data() << 1, 4, 3, 2;
  const auto y = pool.forward(x, Mode::train);
  ASSERT_EQ(y.numel(), 1);
  EXPECT_EQ(y.data()[0], 4);
  Tensor<double> dy(y.shape());
  dy.data()[0] = 2.5;
  const auto dx = pool.backward(dy);
  EXPECT_EQ(dx.data()[1], 2.5);
  EXPECT_EQ(dx.data().sum(), 2.5);
}

TEST(Sigmoid, StaysStrictlyInsideUnitInterval) {
  Eigen::ArrayXf z(4);
  z << -1000.f, -50.f, 50.f, 1000.f;
  const Eigen::ArrayXf s = sigmoid(z);
  EXPECT_TRUE((s > 0.f).all());
  EXPECT_TRUE((s < 1.f).all());
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(VisionTransformer, GradientsMatchFiniteDifferences) {
  TransformerDims dims;
  dims.embed_dim = 8;
  dims.depth = 1;
  dims.heads = 2;
  dims.grid_side = 2;
  VisionTransformer<double> vit("backbone", dims);
  Rng rng(3);
  vit.init(rng);
  ParameterList<double> params;
  vit.collect(params);
  const auto images = random_tensor(2, 3, 28, 28, 14);
  const auto tp = random_tensor(2, 8, 2, 2, 15);
  const RowMatrix<double> tc = RowMatrix<double>::Random(2, 8);
  auto loss = [&] {
    const auto out = vit.forward(images, false);
    return 0.5 * (out.patch_tokens.data() - tp.data()).squaredNorm() + 0.5 * (out.class_tokens - tc).squaredNorm();
  };
  zero_grads(params);
  auto out = vit.forward(images, true);
  Tensor<double> dp(out.patch_tokens.shape());
  dp.data() = out.patch_tokens.data() - tp.data();
  vit.backward(dp, out.class_tokens - tc);
  std::vector<Vector<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  const auto r = testing::finite_difference_check(params, analytic, loss, 6, 1e-5, 21);
  EXPECT_GE(r.pass_rate(), 0.98) << "worst " << r.worst << " checked " << r.checked;
}

TEST(VisionTransformer, DepthZeroIsLinearPatchProjection) {
  TransformerDims dims;
  dims.embed_dim = 5;
  dims.depth = 0;
  dims.grid_side = 3;
  VisionTransformer<double> vit("backbone", dims);
  Rng rng(4);
  vit.init(rng);
  auto a = random_tensor(1, 3, 42, 42, 1), b = random_tensor(1, 3, 42, 42, 2);
  Tensor<double> sum(a.shape());
  sum.data() = a.data() + b.data();
  ParameterList<double> params;
  vit.collect(params);
  params[1]->value.setZero();  // bias
  const auto ta = vit.forward(a, false), tb = vit.forward(b, false), ts = vit.forward(sum, false);
  EXPECT_LT((ts.patch_tokens.data() - ta.patch_tokens.data() - tb.patch_tokens.data()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((ta.class_tokens.row(0).transpose() - ta.patch_tokens.sample(0).rowwise().mean()).norm(), 1e-12);
}

}  // namespace
}  // namespace wcam::nn
