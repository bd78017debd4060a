#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/SpecialFunctions>

#include "wcam/nn/layers.hpp"

namespace wcam::nn {

// Row-wise layer normalization over the feature dimension of a token matrix.
template <typename Scalar>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, Index dim, double eps = 1e-6)
      : dim_(dim), eps_(eps), gamma_(join_name(name, "weight"), {dim}), beta_(join_name(name, "bias"), {dim}) {
    gamma_.value.setOnes();
  }

  void collect(ParameterList<Scalar>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  struct Cache {
    RowMatrix<Scalar> xhat;
    Vector<Scalar> rstd;
  };

  RowMatrix<Scalar> forward(const RowMatrix<Scalar>& x, Cache* cache) const {
    const Vector<Scalar> mean = x.rowwise().mean();
    RowMatrix<Scalar> xc = x.colwise() - mean;
    const Vector<Scalar> rstd =
        ((xc.array().square().rowwise().sum() / Scalar(dim_)) + Scalar(eps_)).rsqrt().matrix();
    xc = (xc.array().colwise() * rstd.array()).matrix();
    RowMatrix<Scalar> y = (xc.array().rowwise() * gamma_.value.array().transpose()).matrix();
    y.rowwise() += beta_.value.transpose();
    if (cache) {
      cache->xhat = std::move(xc);
      cache->rstd = rstd;
    }
    return y;
  }

  RowMatrix<Scalar> backward(const RowMatrix<Scalar>& dy, const Cache& cache) {
    gamma_.grad += dy.cwiseProduct(cache.xhat).colwise().sum().transpose();
    beta_.grad += dy.colwise().sum().transpose();
    const RowMatrix<Scalar> dxhat = (dy.array().rowwise() * gamma_.value.array().transpose()).matrix();
    const Vector<Scalar> s1 = dxhat.rowwise().sum();
    const Vector<Scalar> s2 = dxhat.cwiseProduct(cache.xhat).rowwise().sum();
    RowMatrix<Scalar> dx = (dxhat * Scalar(dim_)).colwise() - s1;
    dx -= (cache.xhat.array().colwise() * s2.array()).matrix();
    return (dx.array().colwise() * (cache.rstd.array() / Scalar(dim_))).matrix();
  }

 private:
  Index dim_ = 0;
  double eps_ = 1e-6;
  Parameter<Scalar> gamma_, beta_;
};

template <typename Derived>
auto gelu(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return Scalar(0.5) * x * (Scalar(1) + (x * Scalar(M_SQRT1_2)).erf());
}

template <typename Derived>
auto gelu_derivative(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar inv_sqrt_2pi = Scalar(0.3989422804014327);
  return Scalar(0.5) * (Scalar(1) + (x * Scalar(M_SQRT1_2)).erf()) + x * inv_sqrt_2pi * (Scalar(-0.5) * x.square()).exp();
}

// Affine map on token rows with weight stored (out x in), as in torch.nn.Linear.
template <typename Scalar>
class TokenLinear {
 public:
  TokenLinear() = default;
  TokenLinear(const std::string& name, Index in, Index out)
      : in_(in), out_(out), weight_(join_name(name, "weight"), {out, in}), bias_(join_name(name, "bias"), {out}) {}

  void init(Rng& rng) { weight_.init_fan_in_uniform(in_, rng); }
  void collect(ParameterList<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Eigen::Map<const RowMatrix<Scalar>> w() const { return {weight_.value.data(), out_, in_}; }

  RowMatrix<Scalar> forward(const RowMatrix<Scalar>& x) const {
    RowMatrix<Scalar> y = x * w().transpose();
    y.rowwise() += bias_.value.transpose();
    return y;
  }

  RowMatrix<Scalar> backward(const RowMatrix<Scalar>& dy, const RowMatrix<Scalar>& x) {
    Eigen::Map<RowMatrix<Scalar>>(weight_.grad.data(), out_, in_).noalias() += dy.transpose() * x;
    bias_.grad += dy.colwise().sum().transpose();
    return dy * w();
  }

 private:
  Index in_ = 0, out_ = 0;
  Parameter<Scalar> weight_, bias_;
};

struct TransformerDims {
  Index embed_dim = 768;
  Index depth = 12;
  Index heads = 12;
  Index patch_size = 14;
  Index mlp_ratio = 4;
  Index grid_side = 43;

  Index image_side() const { return grid_side * patch_size; }
  Index num_patches() const { return grid_side * grid_side; }
};

// Pre-norm transformer block with layer scale: x += ls1*attn(norm1(x));
// x += ls2*mlp(norm2(x)).
template <typename Scalar>
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(const std::string& name, Index dim, Index heads, Index mlp_ratio)
      : dim_(dim),
        heads_(heads),
        norm1_(join_name(name, "norm1"), dim),
        qkv_(join_name(name, "attn.qkv"), dim, 3 * dim),
        proj_(join_name(name, "attn.proj"), dim, dim),
        ls1_(join_name(name, "ls1.gamma"), {dim}),
        norm2_(join_name(name, "norm2"), dim),
        fc1_(join_name(name, "mlp.fc1"), dim, mlp_ratio * dim),
        fc2_(join_name(name, "mlp.fc2"), mlp_ratio * dim, dim),
        ls2_(join_name(name, "ls2.gamma"), {dim}) {
    if (dim % heads != 0) throw ConfigError(name + ": embed dim must be divisible by head count");
    ls1_.value.setOnes();
    ls2_.value.setOnes();
  }

  void init(Rng& rng) {
    qkv_.init(rng);
    proj_.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
  }

  void collect(ParameterList<Scalar>& out) {
    norm1_.collect(out);
    qkv_.collect(out);
    proj_.collect(out);
    out.push_back(&ls1_);
    norm2_.collect(out);
    fc1_.collect(out);
    fc2_.collect(out);
    out.push_back(&ls2_);
  }

  struct Cache {
    typename LayerNorm<Scalar>::Cache ln1, ln2;
    RowMatrix<Scalar> h1, qkv, attn, attn_out, x_mid, h2, pre, act, mlp_out;
  };

  RowMatrix<Scalar> forward(const RowMatrix<Scalar>& x, Cache* cache) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    c.h1 = norm1_.forward(x, &c.ln1);
    c.qkv = qkv_.forward(c.h1);
    c.attn = attention(c.qkv);
    c.attn_out = proj_.forward(c.attn);
    c.x_mid = x + (c.attn_out.array().rowwise() * ls1_.value.array().transpose()).matrix();
    c.h2 = norm2_.forward(c.x_mid, &c.ln2);
    c.pre = fc1_.forward(c.h2);
    c.act = gelu(c.pre.array()).matrix();
    c.mlp_out = fc2_.forward(c.act);
    return c.x_mid + (c.mlp_out.array().rowwise() * ls2_.value.array().transpose()).matrix();
  }

  RowMatrix<Scalar> backward(const RowMatrix<Scalar>& dy, const Cache& c) {
    ls2_.grad += dy.cwiseProduct(c.mlp_out).colwise().sum().transpose();
    RowMatrix<Scalar> d = (dy.array().rowwise() * ls2_.value.array().transpose()).matrix();
    d = fc2_.backward(d, c.act);
    d = d.cwiseProduct(gelu_derivative(c.pre.array()).matrix());
    d = fc1_.backward(d, c.h2);
    RowMatrix<Scalar> dx_mid = dy + norm2_.backward(d, c.ln2);

    ls1_.grad += dx_mid.cwiseProduct(c.attn_out).colwise().sum().transpose();
    d = (dx_mid.array().rowwise() * ls1_.value.array().transpose()).matrix();
    d = proj_.backward(d, c.attn);
    d = attention_backward(d, c.qkv);
    d = qkv_.backward(d, c.h1);
    return dx_mid + norm1_.backward(d, c.ln1);
  }

 private:
  RowMatrix<Scalar> attention(const RowMatrix<Scalar>& qkv) const {
    const Index tokens = qkv.rows(), hd = dim_ / heads_;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(hd));
    RowMatrix<Scalar> out(tokens, dim_);
    for (Index h = 0; h < heads_; ++h) {
      const auto q = qkv.middleCols(h * hd, hd);
      const auto k = qkv.middleCols(dim_ + h * hd, hd);
      const auto v = qkv.middleCols(2 * dim_ + h * hd, hd);
      RowMatrix<Scalar> a = softmax_rows((q * k.transpose()) * scale);
      out.middleCols(h * hd, hd).noalias() = a * v;
    }
    return out;
  }

  RowMatrix<Scalar> attention_backward(const RowMatrix<Scalar>& dout, const RowMatrix<Scalar>& qkv) const {
    const Index tokens = qkv.rows(), hd = dim_ / heads_;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(hd));
    RowMatrix<Scalar> dqkv(tokens, 3 * dim_);
    for (Index h = 0; h < heads_; ++h) {
      const auto q = qkv.middleCols(h * hd, hd);
      const auto k = qkv.middleCols(dim_ + h * hd, hd);
      const auto v = qkv.middleCols(2 * dim_ + h * hd, hd);
      const auto dO = dout.middleCols(h * hd, hd);
      const RowMatrix<Scalar> a = softmax_rows((q * k.transpose()) * scale);
      dqkv.middleCols(2 * dim_ + h * hd, hd).noalias() = a.transpose() * dO;
      RowMatrix<Scalar> da = dO * v.transpose();
      const Vector<Scalar> row_dot = da.cwiseProduct(a).rowwise().sum();
      RowMatrix<Scalar> ds = ((da.colwise() - row_dot).array() * a.array()).matrix() * scale;
      dqkv.middleCols(h * hd, hd).noalias() = ds * k;
      dqkv.middleCols(dim_ + h * hd, hd).noalias() = ds.transpose() * q;
    }
    return dqkv;
  }

  static RowMatrix<Scalar> softmax_rows(RowMatrix<Scalar> s) {
    const Vector<Scalar> mx = s.rowwise().maxCoeff();
    s = (s.colwise() - mx).array().exp().matrix();
    const Vector<Scalar> sum = s.rowwise().sum();
    return (s.array().colwise() / sum.array()).matrix();
  }

  Index dim_ = 0, heads_ = 1;
  LayerNorm<Scalar> norm1_;
  TokenLinear<Scalar> qkv_, proj_;
  Parameter<Scalar> ls1_;
  LayerNorm<Scalar> norm2_;
  TokenLinear<Scalar> fc1_, fc2_;
  Parameter<Scalar> ls2_;
};

template <typename Scalar>
struct TokenOutput {
  Tensor<Scalar> patch_tokens;       // (N, D, grid, grid)
  RowMatrix<Scalar> class_tokens;    // (N x D)
};

// Patch-embedding vision transformer. With depth 0 it degenerates to a plain
// linear projection of 14x14x3 patches; the class token is then the spatial
// mean of the patch tokens, since there is no attention to produce one.
template <typename Scalar>
class VisionTransformer {
 public:
  VisionTransformer() = default;
  VisionTransformer(const std::string& name, const TransformerDims& dims)
      : dims_(dims),
        patch_embed_(join_name(name, "patch_embed.proj"), 3, dims.embed_dim, dims.patch_size, dims.patch_size, 0) {
    if (dims.depth > 0) {
      cls_token_ = Parameter<Scalar>(join_name(name, "cls_token"), {dims.embed_dim});
      pos_embed_ = Parameter<Scalar>(join_name(name, "pos_embed"), {dims.num_patches() + 1, dims.embed_dim});
      for (Index i = 0; i < dims.depth; ++i)
        blocks_.emplace_back(join_name(name, "blocks." + std::to_string(i)), dims.embed_dim, dims.heads, dims.mlp_ratio);
      norm_ = LayerNorm<Scalar>(join_name(name, "norm"), dims.embed_dim);
    }
  }

  const TransformerDims& dims() const { return dims_; }

  void init(Rng& rng) {
    patch_embed_.init(rng);
    if (dims_.depth == 0) return;
    for (Index i = 0; i < cls_token_.size(); ++i) cls_token_.value[i] = static_cast<Scalar>(rng.normal(0, 0.02));
    for (Index i = 0; i < pos_embed_.size(); ++i) pos_embed_.value[i] = static_cast<Scalar>(rng.normal(0, 0.02));
    for (auto& b : blocks_) b.init(rng);
  }

  void collect(ParameterList<Scalar>& out) {
    patch_embed_.collect(out);
    if (dims_.depth == 0) return;
    out.push_back(&cls_token_);
    out.push_back(&pos_embed_);
    for (auto& b : blocks_) b.collect(out);
    norm_.collect(out);
  }

  // record=true keeps per-sample activations for backward().
  TokenOutput<Scalar> forward(const Tensor<Scalar>& images, bool record) {
    const Index side = dims_.image_side();
    if (images.c() != 3 || images.h() != side || images.w() != side)
      throw ShapeError("backbone: expected (N, 3, " + std::to_string(side) + ", " + std::to_string(side) + "), got " +
                       images.shape().str());
    const Index g = dims_.grid_side, d = dims_.embed_dim, p = dims_.num_patches();
    auto emb = patch_embed_.forward(images, record ? Mode::train : Mode::eval);
    TokenOutput<Scalar> out{Tensor<Scalar>(images.n(), d, g, g), RowMatrix<Scalar>(images.n(), d)};
    if (record) caches_.assign(static_cast<std::size_t>(images.n()), SampleCache{});
    if (dims_.depth == 0) {
      out.patch_tokens = std::move(emb);
      for (Index i = 0; i < images.n(); ++i) out.class_tokens.row(i) = out.patch_tokens.sample(i).rowwise().mean().transpose();
      return out;
    }
    const auto pos = Eigen::Map<const RowMatrix<Scalar>>(pos_embed_.value.data(), p + 1, d);
    for (Index i = 0; i < images.n(); ++i) {
      RowMatrix<Scalar> x(p + 1, d);
      x.row(0) = cls_token_.value.transpose();
      x.bottomRows(p) = emb.sample(i).transpose();
      x += pos;
      SampleCache* cache = record ? &caches_[static_cast<std::size_t>(i)] : nullptr;
      if (cache) cache->blocks.resize(blocks_.size());
      for (std::size_t b = 0; b < blocks_.size(); ++b) x = blocks_[b].forward(x, cache ? &cache->blocks[b] : nullptr);
      x = norm_.forward(x, cache ? &cache->norm : nullptr);
      out.class_tokens.row(i) = x.row(0);
      out.patch_tokens.sample(i) = x.bottomRows(p).transpose();
    }
    return out;
  }

  // Accumulates parameter gradients given upstream gradients of both outputs.
  void backward(const Tensor<Scalar>& d_patch, const RowMatrix<Scalar>& d_class) {
    const Index n = d_patch.n(), d = dims_.embed_dim, p = dims_.num_patches();
    Tensor<Scalar> d_emb(d_patch.shape());
    if (dims_.depth == 0) {
      for (Index i = 0; i < n; ++i) {
        d_emb.sample(i) = d_patch.sample(i);
        if (d_class.size() > 0) d_emb.sample(i).colwise() += d_class.row(i).transpose() / Scalar(p);
      }
    } else {
      auto pos_grad = Eigen::Map<RowMatrix<Scalar>>(pos_embed_.grad.data(), p + 1, d);
      for (Index i = 0; i < n; ++i) {
        auto& cache = caches_[static_cast<std::size_t>(i)];
        RowMatrix<Scalar> dx(p + 1, d);
        dx.row(0) = d_class.size() > 0 ? RowMatrix<Scalar>(d_class.row(i)) : RowMatrix<Scalar>::Zero(1, d);
        dx.bottomRows(p) = d_patch.sample(i).transpose();
        dx = norm_.backward(dx, cache.norm);
        for (std::size_t b = blocks_.size(); b-- > 0;) dx = blocks_[b].backward(dx, cache.blocks[b]);
        pos_grad += dx;
        cls_token_.grad += dx.row(0).transpose();
        d_emb.sample(i) = dx.bottomRows(p).transpose();
      }
    }
    patch_embed_.backward(d_emb, false);
    caches_.clear();
  }

  void release_cache() {
    caches_.clear();
    patch_embed_.release_cache();
  }

 private:
  struct SampleCache {
    std::vector<typename TransformerBlock<Scalar>::Cache> blocks;
    typename LayerNorm<Scalar>::Cache norm;
  };

  TransformerDims dims_;
  Conv2d<Scalar> patch_embed_;
  Parameter<Scalar> cls_token_, pos_embed_;
  std::vector<TransformerBlock<Scalar>> blocks_;
  LayerNorm<Scalar> norm_;
  std::vector<SampleCache> caches_;
};

}  // namespace wcam::nn
