#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "wcam/model/checkpoint.hpp"
#include "wcam/model/components.hpp"
#include "wcam/nn/transformer.hpp"

namespace wcam::model {

// Common surface of every registered architecture: a batch of preprocessed
// images in, one friction prediction in (0, 1) per image out.
template <typename Scalar>
class RegressionModel {
 public:
  explicit RegressionModel(ModelConfig config) : config_(std::move(config)) {}
  virtual ~RegressionModel() = default;
  RegressionModel(const RegressionModel&) = delete;
  RegressionModel& operator=(const RegressionModel&) = delete;

  const ModelConfig& config() const { return config_; }
  Index input_side() const { return config_.input_side(); }

  virtual Vector<Scalar> forward(const Tensor<Scalar>& images, Mode mode) = 0;
  // Accumulates gradients of every trainable parameter given dLoss/dPrediction.
  virtual void backward(const Vector<Scalar>& d_pred) = 0;
  virtual void release_cache() {}

  // All parameters and buffers in a stable order.
  ParameterList<Scalar> parameters() {
    ParameterList<Scalar> out;
    collect(out);
    return out;
  }
  ParameterList<Scalar> backbone_parameters() {
    ParameterList<Scalar> out;
    collect_backbone(out);
    return out;
  }
  ParameterList<Scalar> trainable_parameters() {
    ParameterList<Scalar> out;
    for (auto* p : parameters())
      if (p->optimizable()) out.push_back(p);
    return out;
  }
  void zero_grad() { nn::zero_grads(parameters()); }

 protected:
  virtual void collect(ParameterList<Scalar>& out) = 0;
  virtual void collect_backbone(ParameterList<Scalar>&) {}

  ModelConfig config_;
};

// Wraps the transformer with its loading and freezing policy.
template <typename Scalar>
class Backbone {
 public:
  Backbone() = default;
  Backbone(const BackboneSpec& spec, Index grid_side) : spec_(spec), net_("backbone", spec.dims(grid_side)) {
    if (spec.pretrained()) {
      load_weights();
    } else {
      Rng rng(spec.seed);
      net_.init(rng);
    }
    ParameterList<Scalar> params;
    net_.collect(params);
    nn::set_trainable(params, !spec.frozen);
  }

  const BackboneSpec& spec() const { return spec_; }
  bool frozen() const { return spec_.frozen; }
  nn::VisionTransformer<Scalar>& net() { return net_; }
  void collect(ParameterList<Scalar>& out) { net_.collect(out); }

  nn::TokenOutput<Scalar> extract(const Tensor<Scalar>& images, Mode mode) {
    return net_.forward(images, !frozen() && mode == Mode::train);
  }

  void backward(const Tensor<Scalar>& d_patch, const RowMatrix<Scalar>& d_class) {
    if (!frozen()) net_.backward(d_patch, d_class);
  }

 private:
  void load_weights() {
    if (spec_.weights_path.empty())
      throw BackboneUnavailable("backbone unavailable: " + to_string(spec_.kind) + " requires a weights file");
    try {
      const auto archive = read_tensor_archive(spec_.weights_path);
      ParameterList<Scalar> params;
      net_.collect(params);
      import_parameters(params, archive, "backbone.");
    } catch (const Error& e) {
      throw BackboneUnavailable("backbone unavailable: cannot load " + spec_.weights_path + ": " + e.what());
    }
  }

  BackboneSpec spec_;
  nn::VisionTransformer<Scalar> net_;
};

// Patch-token grid of the backbone for a batch of preprocessed images.
template <typename Scalar>
Tensor<Scalar> backbone_extract(const Tensor<Scalar>& images, Backbone<Scalar>& backbone) {
  return backbone.extract(images, Mode::eval).patch_tokens;
}

struct FusionTrace {
  nn::Shape4 tokens, hd, fused, head_input;
  Index se_input_channels = 0;
};

template <typename Scalar>
class WCamNet final : public RegressionModel<Scalar> {
 public:
  explicit WCamNet(const ModelConfig& config)
      : RegressionModel<Scalar>(config), backbone_(config.backbone, config.grid_side) {
    config.validate();
    Rng rng(config.init_seed);
    const Index fused = fused_channels();
    if (config.use_hd_branch) {
      hd_ = HdBranch<Scalar>("hd", config.input_side(), config.grid_side);
      hd_.init(rng);
    }
    if (config.use_se_blocks) {
      se1_ = SeResidualBlock<Scalar>("se1", fused, config.se_reduction);
      se2_ = SeResidualBlock<Scalar>("se2", fused, config.se_reduction);
      se1_.init(rng);
      se2_.init(rng);
    }
    head_ = RegressionHead<Scalar>("head", fused);
    head_.init(rng);
  }

  Index fused_channels() const {
    return this->config_.backbone.embed_dim + (this->config_.use_hd_branch ? kHdChannels : 0);
  }

  Backbone<Scalar>& backbone() { return backbone_; }
  HdBranch<Scalar>& hd_branch() { return hd_; }
  SeResidualBlock<Scalar>& se_block(int i) { return i == 0 ? se1_ : se2_; }
  RegressionHead<Scalar>& head() { return head_; }
  const FusionTrace& trace() const { return trace_; }

  Vector<Scalar> forward(const Tensor<Scalar>& images, Mode mode) override {
    Tensor<Scalar> x = backbone_.extract(images, mode).patch_tokens;
    trace_ = FusionTrace{};
    trace_.tokens = x.shape();
    if (this->config_.use_hd_branch) {
      const Tensor<Scalar> hd = hd_.forward(images, mode);
      trace_.hd = hd.shape();
      x = fuse(x, hd);
    }
    trace_.fused = x.shape();
    if (this->config_.use_se_blocks) {
      trace_.se_input_channels = x.c();
      x = se1_.forward(x, mode);
      x = se2_.forward(x, mode);
    }
    trace_.head_input = x.shape();
    return head_.forward(x, mode);
  }

  void backward(const Vector<Scalar>& d_pred) override {
    Tensor<Scalar> d = head_.backward(d_pred);
    if (this->config_.use_se_blocks) d = se1_.backward(se2_.backward(d));
    if (this->config_.use_hd_branch) {
      auto [d_tokens, d_hd] = nn::split_channels(d, this->config_.backbone.embed_dim);
      hd_.backward(d_hd);
    }
  }

  void release_cache() override {
    hd_.release_cache();
    se1_.release_cache();
    se2_.release_cache();
    head_.release_cache();
  }

 protected:
  void collect(ParameterList<Scalar>& out) override {
    backbone_.collect(out);
    if (this->config_.use_hd_branch) hd_.collect(out);
    if (this->config_.use_se_blocks) {
      se1_.collect(out);
      se2_.collect(out);
    }
    head_.collect(out);
  }
  void collect_backbone(ParameterList<Scalar>& out) override { backbone_.collect(out); }

 private:
  Backbone<Scalar> backbone_;
  HdBranch<Scalar> hd_;
  SeResidualBlock<Scalar> se1_, se2_;
  RegressionHead<Scalar> head_;
  FusionTrace trace_;
};

// Bottleneck residual unit: 1x1 reduce, 3x3 (strided), 1x1 expand, projection
// shortcut when the shape changes, ReLU after the sum.
template <typename Scalar>
class Bottleneck {
 public:
  Bottleneck(const std::string& name, Index in, Index mid, Index out, Index stride)
      : a_(nn::join_name(name, "conv1"), in, mid, 1, 1, 0),
        b_(nn::join_name(name, "conv2"), mid, mid, 3, stride, 1),
        c_(nn::join_name(name, "conv3"), mid, out, 1, 1, 0, false),
        project_(stride != 1 || in != out) {
    if (project_) shortcut_ = nn::ConvBnAct<Scalar>(nn::join_name(name, "downsample"), in, out, 1, stride, 0, false);
  }

  void init(Rng& rng) {
    a_.init(rng);
    b_.init(rng);
    c_.init(rng);
    if (project_) shortcut_.init(rng);
  }
  void collect(ParameterList<Scalar>& out) {
    a_.collect(out);
    b_.collect(out);
    c_.collect(out);
    if (project_) shortcut_.collect(out);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x, Mode mode) {
    Tensor<Scalar> main = c_.forward(b_.forward(a_.forward(x, mode), mode), mode);
    return relu_.forward(nn::add(main, project_ ? shortcut_.forward(x, mode) : x), mode);
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Tensor<Scalar> d = relu_.backward(dy);
    Tensor<Scalar> dx = a_.backward(b_.backward(c_.backward(d)));
    dx.data() += project_ ? shortcut_.backward(d).data() : d.data();
    return dx;
  }

  void release_cache() {
    a_.release_cache();
    b_.release_cache();
    c_.release_cache();
    shortcut_.release_cache();
    relu_.release_cache();
  }

 private:
  nn::ConvBnAct<Scalar> a_, b_, c_, shortcut_;
  nn::ReLU<Scalar> relu_;
  bool project_ = false;
};

template <typename Scalar>
class ResNetStyle final : public RegressionModel<Scalar> {
 public:
  ResNetStyle(const ModelConfig& config, const std::vector<Index>& blocks_per_stage) : RegressionModel<Scalar>(config) {
    config.validate();
    const Index div = config.width_divisor;
    const Index stem = std::max<Index>(1, 64 / div);
    Rng rng(config.init_seed);
    stem_ = nn::ConvBnAct<Scalar>("stem", 3, stem, 7, 2, 3);
    stem_.init(rng);
    pool_ = nn::MaxPool2d<Scalar>(3, 2, 1);
    Index in = stem;
    for (std::size_t s = 0; s < blocks_per_stage.size(); ++s) {
      const Index mid = std::max<Index>(1, (64 << s) / div);
      const Index out = 4 * mid;
      for (Index b = 0; b < blocks_per_stage[s]; ++b) {
        const Index stride = (b == 0 && s > 0) ? 2 : 1;
        blocks_.emplace_back("layer" + std::to_string(s + 1) + "." + std::to_string(b), in, mid, out, stride);
        blocks_.back().init(rng);
        in = out;
      }
    }
    head_ = RegressionHead<Scalar>("head", in);
    head_.init(rng);
  }

  Vector<Scalar> forward(const Tensor<Scalar>& images, Mode mode) override {
    nn::require_shape(images, 3, this->input_side(), this->input_side(), "resnet input");
    Tensor<Scalar> x = pool_.forward(stem_.forward(images, mode), mode);
    for (auto& b : blocks_) x = b.forward(x, mode);
    return head_.forward(x, mode);
  }

  void backward(const Vector<Scalar>& d_pred) override {
    Tensor<Scalar> d = head_.backward(d_pred);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) d = it->backward(d);
    stem_.backward(pool_.backward(d), false);
  }

  void release_cache() override {
    stem_.release_cache();
    pool_.release_cache();
    for (auto& b : blocks_) b.release_cache();
    head_.release_cache();
  }

 protected:
  void collect(ParameterList<Scalar>& out) override {
    stem_.collect(out);
    for (auto& b : blocks_) b.collect(out);
    head_.collect(out);
  }

 private:
  nn::ConvBnAct<Scalar> stem_;
  nn::MaxPool2d<Scalar> pool_;
  std::vector<Bottleneck<Scalar>> blocks_;
  RegressionHead<Scalar> head_;
};

// Nineteen-layer VGG layout (16 conv + pooling) with batch normalization,
// global average pooling and a single linear unit in place of the FC stack.
template <typename Scalar>
class VggStyle final : public RegressionModel<Scalar> {
 public:
  explicit VggStyle(const ModelConfig& config) : RegressionModel<Scalar>(config) {
    config.validate();
    static constexpr int kLayout[] = {64, 64, 0, 128, 128, 0, 256, 256, 256, 256, 0,
                                      512, 512, 512, 512, 0, 512, 512, 512, 512, 0};
    Rng rng(config.init_seed);
    Index in = 3;
    int conv_index = 0;
    for (int width : kLayout) {
      if (width == 0) {
        stages_.push_back(Stage{{}, true});
        continue;
      }
      const Index out = std::max<Index>(1, width / config.width_divisor);
      Stage s;
      s.conv = nn::ConvBnAct<Scalar>("features." + std::to_string(conv_index++), in, out, 3, 1, 1);
      s.conv.init(rng);
      stages_.push_back(std::move(s));
      in = out;
    }
    head_ = RegressionHead<Scalar>("head", in);
    head_.init(rng);
  }

  Vector<Scalar> forward(const Tensor<Scalar>& images, Mode mode) override {
    nn::require_shape(images, 3, this->input_side(), this->input_side(), "vgg input");
    Tensor<Scalar> x = images;
    for (auto& s : stages_) x = s.pool ? s.maxpool.forward(x, mode) : s.conv.forward(x, mode);
    return head_.forward(x, mode);
  }

  void backward(const Vector<Scalar>& d_pred) override {
    Tensor<Scalar> d = head_.backward(d_pred);
    for (std::size_t i = stages_.size(); i-- > 0;) {
      auto& s = stages_[i];
      d = s.pool ? s.maxpool.backward(d) : s.conv.backward(d, i != 0);
    }
  }

  void release_cache() override {
    for (auto& s : stages_) {
      s.conv.release_cache();
      s.maxpool.release_cache();
    }
    head_.release_cache();
  }

 protected:
  void collect(ParameterList<Scalar>& out) override {
    for (auto& s : stages_)
      if (!s.pool) s.conv.collect(out);
    head_.collect(out);
  }

 private:
  struct Stage {
    nn::ConvBnAct<Scalar> conv;
    bool pool = false;
    nn::MaxPool2d<Scalar> maxpool{2, 2, 0};
  };
  std::vector<Stage> stages_;
  RegressionHead<Scalar> head_;
};

// Frozen backbone; one linear unit over every patch token plus the class token.
template <typename Scalar>
class BackboneLinearHead final : public RegressionModel<Scalar> {
 public:
  explicit BackboneLinearHead(const ModelConfig& config)
      : RegressionModel<Scalar>(config), backbone_(frozen_spec(config.backbone), config.grid_side) {
    config.validate();
    const Index d = config.backbone.embed_dim, p = config.grid_side * config.grid_side;
    fc_ = nn::Linear<Scalar>("head.fc", p * d + d, 1);
    Rng rng(config.init_seed);
    fc_.init(rng);
  }

  nn::Linear<Scalar>& fc() { return fc_; }

  Vector<Scalar> forward(const Tensor<Scalar>& images, Mode mode) override {
    const auto tokens = backbone_.extract(images, Mode::eval);
    const Index n = images.n(), per = tokens.patch_tokens.sample_size(), d = tokens.class_tokens.cols();
    RowMatrix<Scalar> features(n, per + d);
    for (Index i = 0; i < n; ++i) {
      features.row(i).head(per) = Eigen::Map<const nn::RowMatrix<Scalar>>(tokens.patch_tokens.data().data() + i * per, 1, per);
      features.row(i).tail(d) = tokens.class_tokens.row(i);
    }
    Vector<Scalar> pred = nn::sigmoid(fc_.forward(features, mode).col(0).array()).matrix();
    if (mode == Mode::train) pred_ = pred;
    return pred;
  }

  void backward(const Vector<Scalar>& d_pred) override {
    RowMatrix<Scalar> dz = (d_pred.array() * pred_.array() * (Scalar(1) - pred_.array())).matrix();
    fc_.backward(dz, false);
  }

  void release_cache() override { fc_.release_cache(); }

 protected:
  void collect(ParameterList<Scalar>& out) override {
    backbone_.collect(out);
    fc_.collect(out);
  }
  void collect_backbone(ParameterList<Scalar>& out) override { backbone_.collect(out); }

 private:
  static BackboneSpec frozen_spec(BackboneSpec s) {
    s.frozen = true;
    return s;
  }

  Backbone<Scalar> backbone_;
  nn::Linear<Scalar> fc_;
  Vector<Scalar> pred_;
};

// Whole transformer trained end to end, regressing from the class token.
template <typename Scalar>
class VitFineTune final : public RegressionModel<Scalar> {
 public:
  explicit VitFineTune(const ModelConfig& config)
      : RegressionModel<Scalar>(config), backbone_(unfrozen_spec(config.backbone), config.grid_side) {
    config.validate();
    fc_ = nn::Linear<Scalar>("head.fc", config.backbone.embed_dim, 1);
    Rng rng(config.init_seed);
    fc_.init(rng);
  }

  Vector<Scalar> forward(const Tensor<Scalar>& images, Mode mode) override {
    auto tokens = backbone_.extract(images, mode);
    Vector<Scalar> pred = nn::sigmoid(fc_.forward(tokens.class_tokens, mode).col(0).array()).matrix();
    if (mode == Mode::train) {
      pred_ = pred;
      token_shape_ = tokens.patch_tokens.shape();
    }
    return pred;
  }

  void backward(const Vector<Scalar>& d_pred) override {
    RowMatrix<Scalar> dz = (d_pred.array() * pred_.array() * (Scalar(1) - pred_.array())).matrix();
    const RowMatrix<Scalar> d_class = fc_.backward(dz);
    backbone_.backward(Tensor<Scalar>(token_shape_), d_class);
  }

  void release_cache() override {
    fc_.release_cache();
    backbone_.net().release_cache();
  }

 protected:
  void collect(ParameterList<Scalar>& out) override {
    backbone_.collect(out);
    fc_.collect(out);
  }
  void collect_backbone(ParameterList<Scalar>& out) override { backbone_.collect(out); }

 private:
  static BackboneSpec unfrozen_spec(BackboneSpec s) {
    s.frozen = false;
    return s;
  }

  Backbone<Scalar> backbone_;
  nn::Linear<Scalar> fc_;
  Vector<Scalar> pred_;
  nn::Shape4 token_shape_;
};

template <typename Scalar>
std::unique_ptr<RegressionModel<Scalar>> build_model(const ModelConfig& config) {
  config.validate();
  switch (config.architecture) {
    case Architecture::wcamnet: return std::make_unique<WCamNet<Scalar>>(config);
    case Architecture::resnet50_style: return std::make_unique<ResNetStyle<Scalar>>(config, std::vector<Index>{3, 4, 6, 3});
    case Architecture::resnet152_style:
      return std::make_unique<ResNetStyle<Scalar>>(config, std::vector<Index>{3, 8, 36, 3});
    case Architecture::vgg19_style: return std::make_unique<VggStyle<Scalar>>(config);
    case Architecture::backbone_linear_head: return std::make_unique<BackboneLinearHead<Scalar>>(config);
    case Architecture::vit_full_finetune: return std::make_unique<VitFineTune<Scalar>>(config);
  }
  throw RegistryError("unregistered architecture");
}

template <typename Scalar>
std::unique_ptr<RegressionModel<Scalar>> build_model(const std::string& architecture, ModelConfig config) {
  config.architecture = parse_architecture(architecture);
  return build_model<Scalar>(config);
}

// Checkpoints hold every parameter and buffer except the weights of a frozen
// pretrained backbone, which are reloaded from the path in the config.
template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, RegressionModel<Scalar>& model,
                     const data::Normalization& normalization, const nlohmann::json& metadata = {}) {
  TensorArchive archive;
  archive.header["kind"] = "checkpoint";
  archive.header["model_config"] = model.config();
  archive.header["normalization"] = normalization;
  if (!metadata.is_null()) archive.header["metadata"] = metadata;
  const bool skip_backbone = model.config().backbone.pretrained() && model.config().backbone.frozen;
  ParameterList<Scalar> keep;
  const auto backbone = model.backbone_parameters();
  for (auto* p : model.parameters()) {
    const bool in_backbone = std::find(backbone.begin(), backbone.end(), p) != backbone.end();
    if (!(skip_backbone && in_backbone)) keep.push_back(p);
  }
  export_parameters(keep, archive);
  write_tensor_archive(path, archive);
}

template <typename Scalar>
struct LoadedCheckpoint {
  std::unique_ptr<RegressionModel<Scalar>> model;
  data::Normalization normalization;
  nlohmann::json metadata;
};

template <typename Scalar>
void load_parameters_into(RegressionModel<Scalar>& model, const TensorArchive& archive) {
  const bool skip_backbone = model.config().backbone.pretrained() && model.config().backbone.frozen;
  const auto backbone = model.backbone_parameters();
  ParameterList<Scalar> wanted;
  for (auto* p : model.parameters()) {
    const bool in_backbone = std::find(backbone.begin(), backbone.end(), p) != backbone.end();
    if (!(skip_backbone && in_backbone)) wanted.push_back(p);
  }
  import_parameters(wanted, archive);
}

template <typename Scalar>
LoadedCheckpoint<Scalar> load_checkpoint(const std::filesystem::path& path,
                                         const ModelConfig* expected_config = nullptr) {
  const auto archive = read_tensor_archive(path);
  if (archive.header.value("kind", "") != "checkpoint") throw CheckpointError(path.string() + " is not a model checkpoint");
  ModelConfig config;
  try {
    config = archive.header.at("model_config").get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint config unreadable: " + std::string(e.what()));
  }
  if (expected_config && nlohmann::json(*expected_config) != nlohmann::json(config))
    throw CheckpointError("checkpoint/config mismatch: checkpoint was trained with " + nlohmann::json(config).dump());
  LoadedCheckpoint<Scalar> out;
  out.model = build_model<Scalar>(config);
  load_parameters_into(*out.model, archive);
  out.normalization = archive.header.at("normalization").get<data::Normalization>();
  out.metadata = archive.header.value("metadata", nlohmann::json::object());
  return out;
}

}  // namespace wcam::model
