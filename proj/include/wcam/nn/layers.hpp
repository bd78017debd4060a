#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "wcam/nn/parameter.hpp"
#include "wcam/nn/tensor.hpp"

namespace wcam::nn {

inline Index conv_output_size(Index in, Index kernel, Index stride, Index pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// Unfolds one sample (C x H*W) into a (C*k*k) x (Ho*Wo) patch matrix.
template <typename Scalar, typename In>
void im2col(const In& x, Index h, Index w, Index kernel, Index stride, Index pad, RowMatrix<Scalar>& col) {
  const Index channels = x.rows();
  const Index ho = conv_output_size(h, kernel, stride, pad);
  const Index wo = conv_output_size(w, kernel, stride, pad);
  col.resize(channels * kernel * kernel, ho * wo);
  for (Index c = 0; c < channels; ++c) {
    const Scalar* src = x.row(c).data();
    for (Index ky = 0; ky < kernel; ++ky) {
      for (Index kx = 0; kx < kernel; ++kx) {
        Scalar* dst = col.row((c * kernel + ky) * kernel + kx).data();
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - pad + ky;
          Scalar* drow = dst + oy * wo;
          if (iy < 0 || iy >= h) {
            std::fill(drow, drow + wo, Scalar(0));
            continue;
          }
          const Scalar* srow = src + iy * w;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - pad + kx;
            drow[ox] = (ix >= 0 && ix < w) ? srow[ix] : Scalar(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-adds a patch-matrix gradient back to (C x H*W).
template <typename Scalar, typename Out>
void col2im_add(const RowMatrix<Scalar>& col, Index h, Index w, Index kernel, Index stride, Index pad, Out&& dx) {
  const Index channels = dx.rows();
  const Index ho = conv_output_size(h, kernel, stride, pad);
  const Index wo = conv_output_size(w, kernel, stride, pad);
  for (Index c = 0; c < channels; ++c) {
    Scalar* dst = dx.row(c).data();
    for (Index ky = 0; ky < kernel; ++ky) {
      for (Index kx = 0; kx < kernel; ++kx) {
        const Scalar* src = col.row((c * kernel + ky) * kernel + kx).data();
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          Scalar* drow = dst + iy * w;
          const Scalar* srow = src + oy * wo;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) drow[ix] += srow[ox];
          }
        }
      }
    }
  }
}

template <typename Scalar>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, Index in_channels, Index out_channels, Index kernel, Index stride, Index pad)
      : in_(in_channels),
        out_(out_channels),
        kernel_(kernel),
        stride_(stride),
        pad_(pad),
        weight_(join_name(name, "weight"), {out_channels, in_channels, kernel, kernel}),
        bias_(join_name(name, "bias"), {out_channels}) {}

  void init(Rng& rng) {
    weight_.init_fan_in_uniform(in_ * kernel_ * kernel_, rng);
    bias_.value.setZero();
  }

  void collect(ParameterList<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }
  Index output_size(Index in) const { return conv_output_size(in, kernel_, stride_, pad_); }

  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    if (x.c() != in_) throw ShapeError(weight_.name + ": expected " + std::to_string(in_) + " input channels, got " + x.shape().str());
    const Index ho = output_size(x.h()), wo = output_size(x.w());
    if (ho <= 0 || wo <= 0) throw ShapeError(weight_.name + ": input too small " + x.shape().str());
    Tensor<Scalar> y(x.n(), out_, ho, wo);
    const auto w = weights();
    RowMatrix<Scalar> col;
    for (Index i = 0; i < x.n(); ++i) {
      im2col<Scalar>(x.sample(i), x.h(), x.w(), kernel_, stride_, pad_, col);
      auto yi = y.sample(i);
      yi.noalias() = w * col;
      yi.colwise() += bias_.value;
    }
    if (mode == Mode::train) input_ = x;
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy, bool need_input_grad = true) {
    const auto w = weights();
    auto dw = Eigen::Map<RowMatrix<Scalar>>(weight_.grad.data(), out_, in_ * kernel_ * kernel_);
    Tensor<Scalar> dx;
    if (need_input_grad) dx = Tensor<Scalar>(input_.shape());
    RowMatrix<Scalar> col, dcol;
    for (Index i = 0; i < dy.n(); ++i) {
      im2col<Scalar>(input_.sample(i), input_.h(), input_.w(), kernel_, stride_, pad_, col);
      const auto dyi = dy.sample(i);
      dw.noalias() += dyi * col.transpose();
      bias_.grad += dyi.rowwise().sum();
      if (need_input_grad) {
        dcol.noalias() = w.transpose() * dyi;
        col2im_add<Scalar>(dcol, input_.h(), input_.w(), kernel_, stride_, pad_, dx.sample(i));
      }
    }
    return dx;
  }

  void release_cache() { input_ = Tensor<Scalar>(); }

 private:
  Eigen::Map<const RowMatrix<Scalar>> weights() const {
    return Eigen::Map<const RowMatrix<Scalar>>(weight_.value.data(), out_, in_ * kernel_ * kernel_);
  }

  Index in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
  Parameter<Scalar> weight_, bias_;
  Tensor<Scalar> input_;
};

// Per-channel normalization over (N, H, W) with running statistics for
// evaluation mode.
template <typename Scalar>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, Index channels, double momentum = 0.1, double eps = 1e-5)
      : channels_(channels),
        momentum_(momentum),
        eps_(eps),
        gamma_(join_name(name, "weight"), {channels}),
        beta_(join_name(name, "bias"), {channels}),
        running_mean_(join_name(name, "running_mean"), {channels}, true),
        running_var_(join_name(name, "running_var"), {channels}, true) {
    gamma_.value.setOnes();
    running_var_.value.setOnes();
  }

  void collect(ParameterList<Scalar>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&running_mean_);
    out.push_back(&running_var_);
  }

  Parameter<Scalar>& gamma() { return gamma_; }
  Parameter<Scalar>& beta() { return beta_; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    if (x.c() != channels_) throw ShapeError(gamma_.name + ": channel mismatch " + x.shape().str());
    const Index hw = x.plane();
    const double count = static_cast<double>(x.n() * hw);
    Tensor<Scalar> y(x.shape());
    Vector<Scalar> mean(channels_), inv_std(channels_);
    if (mode == Mode::train) {
      Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(channels_), sq = Eigen::ArrayXd::Zero(channels_);
      for (Index i = 0; i < x.n(); ++i) {
        const auto xi = x.sample(i);
        sum += xi.rowwise().sum().template cast<double>().array();
      }
      const Eigen::ArrayXd mu = sum / count;
      for (Index i = 0; i < x.n(); ++i) {
        const auto xi = x.sample(i);
        for (Index c = 0; c < channels_; ++c)
          sq[c] += (xi.row(c).template cast<double>().array() - mu[c]).square().sum();
      }
      const Eigen::ArrayXd var = sq / count;
      mean = mu.cast<Scalar>().matrix();
      inv_std = (var + eps_).rsqrt().cast<Scalar>().matrix();
      const double unbias = count > 1 ? count / (count - 1) : 1.0;
      running_mean_.value = ((1 - momentum_) * running_mean_.value.template cast<double>().array() + momentum_ * mu)
                                .template cast<Scalar>()
                                .matrix();
      running_var_.value =
          ((1 - momentum_) * running_var_.value.template cast<double>().array() + momentum_ * unbias * var)
              .template cast<Scalar>()
              .matrix();
    } else {
      mean = running_mean_.value;
      inv_std = (running_var_.value.array() + Scalar(eps_)).rsqrt().matrix();
    }
    for (Index i = 0; i < x.n(); ++i) {
      auto yi = y.sample(i);
      yi = ((x.sample(i).colwise() - mean).array().colwise() * (inv_std.array() * gamma_.value.array())).matrix();
      yi.colwise() += beta_.value;
    }
    if (mode == Mode::train) {
      xhat_ = Tensor<Scalar>(x.shape());
      for (Index i = 0; i < x.n(); ++i)
        xhat_.sample(i) = ((x.sample(i).colwise() - mean).array().colwise() * inv_std.array()).matrix();
      inv_std_ = inv_std;
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Scalar m = static_cast<Scalar>(dy.n() * dy.plane());
    Vector<Scalar> sum_dy = Vector<Scalar>::Zero(channels_), sum_dy_xhat = Vector<Scalar>::Zero(channels_);
    for (Index i = 0; i < dy.n(); ++i) {
      const auto dyi = dy.sample(i);
      sum_dy += dyi.rowwise().sum();
      sum_dy_xhat += dyi.cwiseProduct(xhat_.sample(i)).rowwise().sum();
    }
    gamma_.grad += sum_dy_xhat;
    beta_.grad += sum_dy;
    const Vector<Scalar> scale = (gamma_.value.array() * inv_std_.array() / m).matrix();
    Tensor<Scalar> dx(dy.shape());
    for (Index i = 0; i < dy.n(); ++i) {
      auto dxi = dx.sample(i);
      const auto xh = xhat_.sample(i);
      dxi = (dy.sample(i) * m).colwise() - sum_dy;
      dxi -= (xh.array().colwise() * sum_dy_xhat.array()).matrix();
      dxi = (dxi.array().colwise() * scale.array()).matrix();
    }
    return dx;
  }

  void release_cache() { xhat_ = Tensor<Scalar>(); }

 private:
  Index channels_ = 0;
  double momentum_ = 0.1, eps_ = 1e-5;
  Parameter<Scalar> gamma_, beta_, running_mean_, running_var_;
  Tensor<Scalar> xhat_;
  Vector<Scalar> inv_std_;
};

template <typename Scalar>
class ReLU {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    Tensor<Scalar> y(x.shape());
    y.data() = x.data().cwiseMax(Scalar(0));
    if (mode == Mode::train) output_ = y;
    return y;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(dy.shape());
    dx.data() = (output_.data().array() > Scalar(0)).select(dy.data(), Scalar(0));
    return dx;
  }
  void release_cache() { output_ = Tensor<Scalar>(); }

 private:
  Tensor<Scalar> output_;
};

// Fully connected layer on batch-major rows: (N x in) -> (N x out).
template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Index in_features, Index out_features)
      : in_(in_features),
        out_(out_features),
        weight_(join_name(name, "weight"), {out_features, in_features}),
        bias_(join_name(name, "bias"), {out_features}) {}

  void init(Rng& rng) {
    weight_.init_fan_in_uniform(in_, rng);
    bias_.value.setZero();
  }

  void collect(ParameterList<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Index in_features() const { return in_; }
  Index out_features() const { return out_; }
  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }

  Eigen::Map<const RowMatrix<Scalar>> weights() const {
    return Eigen::Map<const RowMatrix<Scalar>>(weight_.value.data(), out_, in_);
  }

  RowMatrix<Scalar> forward(const RowMatrix<Scalar>& x, Mode mode) {
    if (x.cols() != in_)
      throw ShapeError(weight_.name + ": expected " + std::to_string(in_) + " features, got " + std::to_string(x.cols()));
    RowMatrix<Scalar> y = x * weights().transpose();
    y.rowwise() += bias_.value.transpose();
    if (mode == Mode::train) input_ = x;
    return y;
  }

  RowMatrix<Scalar> backward(const RowMatrix<Scalar>& dy, bool need_input_grad = true) {
    Eigen::Map<RowMatrix<Scalar>>(weight_.grad.data(), out_, in_).noalias() += dy.transpose() * input_;
    bias_.grad += dy.colwise().sum().transpose();
    if (!need_input_grad) return {};
    return dy * weights();
  }

  void release_cache() { input_ = RowMatrix<Scalar>(); }

 private:
  Index in_ = 0, out_ = 0;
  Parameter<Scalar> weight_, bias_;
  RowMatrix<Scalar> input_;
};

// Spatial mean per channel: (N, C, H, W) -> (N x C).
template <typename Scalar>
RowMatrix<Scalar> global_average_pool(const Tensor<Scalar>& x) {
  RowMatrix<Scalar> out(x.n(), x.c());
  for (Index i = 0; i < x.n(); ++i) out.row(i) = x.sample(i).rowwise().mean().transpose();
  return out;
}

template <typename Scalar>
Tensor<Scalar> global_average_pool_backward(const RowMatrix<Scalar>& dy, const Shape4& input_shape) {
  Tensor<Scalar> dx(input_shape);
  const Scalar inv = Scalar(1) / static_cast<Scalar>(input_shape.h * input_shape.w);
  for (Index i = 0; i < input_shape.n; ++i) dx.sample(i).colwise() = dy.row(i).transpose() * inv;
  return dx;
}

// Logits are clamped to the range where the logistic function is still
// representable strictly inside (0, 1) for the scalar type.
template <typename Scalar>
constexpr Scalar sigmoid_logit_limit() {
  return std::is_same_v<Scalar, float> ? Scalar(15) : Scalar(30);
}

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  constexpr Scalar lim = sigmoid_logit_limit<Scalar>();
  return (Scalar(1) + (-x.cwiseMax(-lim).cwiseMin(lim)).exp()).inverse();
}

template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar sigmoid(Scalar x) {
  constexpr Scalar lim = sigmoid_logit_limit<Scalar>();
  return Scalar(1) / (Scalar(1) + std::exp(-std::clamp(x, -lim, lim)));
}

// Channel concatenation along C; shapes must agree in N, H, W.
template <typename Scalar>
Tensor<Scalar> concat_channels(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
    throw ShapeError("concat_channels: mismatched inputs " + a.shape().str() + " and " + b.shape().str());
  Tensor<Scalar> out(a.n(), a.c() + b.c(), a.h(), a.w());
  for (Index i = 0; i < a.n(); ++i) {
    out.sample(i).topRows(a.c()) = a.sample(i);
    out.sample(i).bottomRows(b.c()) = b.sample(i);
  }
  return out;
}

template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> split_channels(const Tensor<Scalar>& x, Index first) {
  Tensor<Scalar> a(x.n(), first, x.h(), x.w()), b(x.n(), x.c() - first, x.h(), x.w());
  for (Index i = 0; i < x.n(); ++i) {
    a.sample(i) = x.sample(i).topRows(first);
    b.sample(i) = x.sample(i).bottomRows(x.c() - first);
  }
  return {std::move(a), std::move(b)};
}

template <typename Scalar>
class MaxPool2d {
 public:
  MaxPool2d() = default;
  MaxPool2d(Index kernel, Index stride, Index pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    const Index ho = conv_output_size(x.h(), kernel_, stride_, pad_);
    const Index wo = conv_output_size(x.w(), kernel_, stride_, pad_);
    Tensor<Scalar> y(x.n(), x.c(), ho, wo);
    std::vector<Index> arg(static_cast<std::size_t>(y.numel()));
    Index k = 0;
    for (Index n = 0; n < x.n(); ++n)
      for (Index c = 0; c < x.c(); ++c)
        for (Index oy = 0; oy < ho; ++oy)
          for (Index ox = 0; ox < wo; ++ox, ++k) {
            Scalar best = -std::numeric_limits<Scalar>::infinity();
            Index best_idx = -1;
            for (Index ky = 0; ky < kernel_; ++ky) {
              const Index iy = oy * stride_ - pad_ + ky;
              if (iy < 0 || iy >= x.h()) continue;
              for (Index kx = 0; kx < kernel_; ++kx) {
                const Index ix = ox * stride_ - pad_ + kx;
                if (ix < 0 || ix >= x.w()) continue;
                const Index idx = ((n * x.c() + c) * x.h() + iy) * x.w() + ix;
                if (x.data()[idx] > best) {
                  best = x.data()[idx];
                  best_idx = idx;
                }
              }
            }
            y.data()[k] = best;
            arg[static_cast<std::size_t>(k)] = best_idx;
          }
    if (mode == Mode::train) {
      argmax_ = std::move(arg);
      input_shape_ = x.shape();
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    Tensor<Scalar> dx(input_shape_);
    for (Index k = 0; k < dy.numel(); ++k) dx.data()[argmax_[static_cast<std::size_t>(k)]] += dy.data()[k];
    return dx;
  }

  void release_cache() { argmax_.clear(); }

 private:
  Index kernel_ = 2, stride_ = 2, pad_ = 0;
  std::vector<Index> argmax_;
  Shape4 input_shape_;
};

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("add: mismatched shapes " + a.shape().str() + " and " + b.shape().str());
  Tensor<Scalar> out(a.shape());
  out.data() = a.data() + b.data();
  return out;
}

// Conv -> BatchNorm -> optional ReLU, the unit most CNN stages are built from.
template <typename Scalar>
class ConvBnAct {
 public:
  ConvBnAct() = default;
  ConvBnAct(const std::string& name, Index in, Index out, Index kernel, Index stride, Index pad, bool relu = true)
      : conv_(join_name(name, "conv"), in, out, kernel, stride, pad), bn_(join_name(name, "bn"), out), use_relu_(relu) {}

  void init(Rng& rng) { conv_.init(rng); }
  void collect(ParameterList<Scalar>& out) {
    conv_.collect(out);
    bn_.collect(out);
  }

  Conv2d<Scalar>& conv() { return conv_; }
  BatchNorm2d<Scalar>& bn() { return bn_; }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    auto y = bn_.forward(conv_.forward(x, mode), mode);
    return use_relu_ ? relu_.forward(y, mode) : y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy, bool need_input_grad = true) {
    auto g = use_relu_ ? relu_.backward(dy) : dy;
    return conv_.backward(bn_.backward(g), need_input_grad);
  }

  void release_cache() {
    conv_.release_cache();
    bn_.release_cache();
    relu_.release_cache();
  }

 private:
  Conv2d<Scalar> conv_;
  BatchNorm2d<Scalar> bn_;
  ReLU<Scalar> relu_;
  bool use_relu_ = true;
};

}  // namespace wcam::nn
