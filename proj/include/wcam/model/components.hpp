#pragma once

#include <string>

#include "wcam/model/config.hpp"
#include "wcam/nn/layers.hpp"

namespace wcam::model {

using nn::Mode;
using nn::ParameterList;
using nn::RowMatrix;
using nn::Tensor;
using nn::Vector;

// Three strided conv layers taking the full-resolution image down to the
// backbone's token grid: 7x7/7 (3->32), 3x3/2 (32->64), 3x3/1 (64->64), each
// followed by batch normalization and ReLU. Total stride 14.
template <typename Scalar>
class HdBranch {
 public:
  HdBranch() = default;
  HdBranch(const std::string& name, Index input_side, Index grid_side)
      : conv1_(nn::join_name(name, "conv1"), 3, 32, 7, 7, 0),
        conv2_(nn::join_name(name, "conv2"), 32, kHdChannels, 3, 2, 1),
        conv3_(nn::join_name(name, "conv3"), kHdChannels, kHdChannels, 3, 1, 1) {
    const Index s1 = conv1_.conv().output_size(input_side);
    const Index s2 = conv2_.conv().output_size(s1);
    const Index s3 = conv3_.conv().output_size(s2);
    if (s3 != grid_side)
      throw ShapeError("hd branch: input side " + std::to_string(input_side) + " yields " + std::to_string(s3) +
                       "x" + std::to_string(s3) + " features, token grid is " + std::to_string(grid_side) + "x" +
                       std::to_string(grid_side));
  }

  void init(Rng& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
    conv3_.init(rng);
  }

  void collect(ParameterList<Scalar>& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    conv3_.collect(out);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& images, Mode mode) {
    return conv3_.forward(conv2_.forward(conv1_.forward(images, mode), mode), mode);
  }

  void backward(const Tensor<Scalar>& dy) { conv1_.backward(conv2_.backward(conv3_.backward(dy)), false); }

  void release_cache() {
    conv1_.release_cache();
    conv2_.release_cache();
    conv3_.release_cache();
  }

 private:
  nn::ConvBnAct<Scalar> conv1_, conv2_, conv3_;
};

// Channel concatenation of patch tokens (first) and HD features (second).
template <typename Scalar>
Tensor<Scalar> fuse(const Tensor<Scalar>& tokens, const Tensor<Scalar>& hd) {
  return nn::concat_channels(tokens, hd);
}

inline Index squeeze_width(Index channels, Index reduction) { return std::max<Index>(1, channels / reduction); }

// Residual block whose residual branch (conv-bn-relu-conv-bn) is rescaled per
// channel by sigmoid gates computed from its global average, then added to
// the identity path. No activation after the addition.
template <typename Scalar>
class SeResidualBlock {
 public:
  SeResidualBlock() = default;
  SeResidualBlock(const std::string& name, Index channels, Index reduction)
      : channels_(channels),
        conv1_(nn::join_name(name, "conv1"), channels, channels, 3, 1, 1, true),
        conv2_(nn::join_name(name, "conv2"), channels, channels, 3, 1, 1, false),
        fc1_(nn::join_name(name, "se.fc1"), channels, squeeze_width(channels, reduction)),
        fc2_(nn::join_name(name, "se.fc2"), squeeze_width(channels, reduction), channels) {
    if (channels <= 0) throw ConfigError(name + ": SE block needs at least one channel");
    if (reduction <= 0) throw ConfigError(name + ": reduction must be positive");
  }

  void init(Rng& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
  }

  void collect(ParameterList<Scalar>& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    fc1_.collect(out);
    fc2_.collect(out);
  }

  Index channels() const { return channels_; }
  Index squeeze() const { return fc1_.out_features(); }
  nn::ConvBnAct<Scalar>& conv1() { return conv1_; }
  nn::ConvBnAct<Scalar>& conv2() { return conv2_; }
  nn::Linear<Scalar>& fc1() { return fc1_; }
  nn::Linear<Scalar>& fc2() { return fc2_; }
  // (N x C) excitation gates of the most recent forward pass.
  const RowMatrix<Scalar>& last_gates() const { return gates_; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    if (x.c() != channels_)
      throw ShapeError("se block: expected " + std::to_string(channels_) + " channels, got " + x.shape().str());
    Tensor<Scalar> r = conv2_.forward(conv1_.forward(x, mode), mode);
    const RowMatrix<Scalar> pooled = nn::global_average_pool(r);
    RowMatrix<Scalar> z1 = fc1_.forward(pooled, mode);
    RowMatrix<Scalar> a1 = z1.cwiseMax(Scalar(0));
    gates_ = nn::sigmoid(fc2_.forward(a1, mode).array()).matrix();
    Tensor<Scalar> y(x.shape());
    for (Index i = 0; i < x.n(); ++i)
      y.sample(i) = x.sample(i) + (r.sample(i).array().colwise() * gates_.row(i).transpose().array()).matrix();
    if (mode == Mode::train) {
      residual_ = std::move(r);
      z1_ = std::move(z1);
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Index n = dy.n();
    Tensor<Scalar> dr(dy.shape());
    RowMatrix<Scalar> dgate(n, channels_);
    for (Index i = 0; i < n; ++i) {
      dr.sample(i) = (dy.sample(i).array().colwise() * gates_.row(i).transpose().array()).matrix();
      dgate.row(i) = dy.sample(i).cwiseProduct(residual_.sample(i)).rowwise().sum().transpose();
    }
    const RowMatrix<Scalar> dz2 = dgate.cwiseProduct(gates_.cwiseProduct((Scalar(1) - gates_.array()).matrix()));
    RowMatrix<Scalar> da1 = fc2_.backward(dz2);
    const RowMatrix<Scalar> dz1 = (z1_.array() > Scalar(0)).select(da1, Scalar(0));
    const RowMatrix<Scalar> dpooled = fc1_.backward(dz1);
    dr.data() += nn::global_average_pool_backward(dpooled, dy.shape()).data();
    Tensor<Scalar> dx = conv1_.backward(conv2_.backward(dr));
    dx.data() += dy.data();
    return dx;
  }

  void release_cache() {
    conv1_.release_cache();
    conv2_.release_cache();
    fc1_.release_cache();
    fc2_.release_cache();
    residual_ = Tensor<Scalar>();
  }

 private:
  Index channels_ = 0;
  nn::ConvBnAct<Scalar> conv1_, conv2_;
  nn::Linear<Scalar> fc1_, fc2_;
  RowMatrix<Scalar> gates_, z1_;
  Tensor<Scalar> residual_;
};

// Global average pooling, one linear unit, sigmoid.
template <typename Scalar>
class RegressionHead {
 public:
  RegressionHead() = default;
  RegressionHead(const std::string& name, Index channels) : fc_(nn::join_name(name, "fc"), channels, 1) {}

  void init(Rng& rng) { fc_.init(rng); }
  void collect(ParameterList<Scalar>& out) { fc_.collect(out); }
  nn::Linear<Scalar>& fc() { return fc_; }
  Index channels() const { return fc_.in_features(); }

  Vector<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    const RowMatrix<Scalar> pooled = nn::global_average_pool(x);
    Vector<Scalar> pred = nn::sigmoid(fc_.forward(pooled, mode).col(0).array()).matrix();
    if (mode == Mode::train) {
      pred_ = pred;
      input_shape_ = x.shape();
    }
    return pred;
  }

  Tensor<Scalar> backward(const Vector<Scalar>& dpred) {
    RowMatrix<Scalar> dz = (dpred.array() * pred_.array() * (Scalar(1) - pred_.array())).matrix();
    return nn::global_average_pool_backward<Scalar>(fc_.backward(dz), input_shape_);
  }

  void release_cache() { fc_.release_cache(); }

 private:
  nn::Linear<Scalar> fc_;
  Vector<Scalar> pred_;
  nn::Shape4 input_shape_;
};

}  // namespace wcam::model
