#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/grad_check.hpp"
#include "wcam/model/models.hpp"

namespace wcam::model {
namespace {

using nn::Shape4;

Tensor<float> random_images(Index n, Index side, std::uint64_t seed) {
  Tensor<float> t(n, 3, side, side);
  Rng rng(seed);
  for (Index i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<float>(rng.normal());
  return t;
}

ModelConfig tiny_wcamnet(Index embed_dim = kTinyEmbedDim) {
  ModelConfig c = desk_config(Architecture::wcamnet);
  c.backbone = BackboneSpec::tiny(embed_dim);
  return c;
}

TEST(BackboneExtract, BaseWidthGridShape) {
  Backbone<float> backbone(BackboneSpec::tiny(kBaseEmbedDim), kGridSide);
  const auto grid = backbone_extract(random_images(2, kInputSide, 1), backbone);
  EXPECT_EQ(grid.shape(), (Shape4{2, 768, 43, 43}));
}

TEST(BackboneExtract, LargeWidthGridShape) {
  Backbone<float> backbone(BackboneSpec::tiny(kLargeEmbedDim), kGridSide);
  const auto grid = backbone_extract(random_images(1, kInputSide, 2), backbone);
  EXPECT_EQ(grid.shape(), (Shape4{1, 1024, 43, 43}));
}

TEST(BackboneExtract, FrozenBackboneIsBitwiseDeterministic) {
  Backbone<float> backbone(BackboneSpec::tiny(), kGridSide);
  const auto images = random_images(2, kInputSide, 3);
  const auto a = backbone_extract(images, backbone);
  const auto b = backbone_extract(images, backbone);
  EXPECT_TRUE(a.data() == b.data());
}

TEST(BackboneExtract, RejectsNon602Input) {
  Backbone<float> backbone(BackboneSpec::tiny(), kGridSide);
  EXPECT_THROW(backbone_extract(random_images(1, 600, 4), backbone), ShapeError);
}

TEST(BackboneExtract, MissingPretrainedWeightsIsBackboneUnavailable) {
  EXPECT_THROW(Backbone<float>(BackboneSpec::pretrained_base(""), kGridSide), BackboneUnavailable);
  EXPECT_THROW(Backbone<float>(BackboneSpec::pretrained_base("/nonexistent/dinov2_b.wcam"), kGridSide),
               BackboneUnavailable);
}

TEST(BackboneExtract, PretrainedWeightsLoadFromArchive) {
  // A scaled-down transformer written in the converter's archive layout.
  BackboneSpec spec = BackboneSpec::pretrained_base("");
  spec.embed_dim = 16;
  spec.depth = 1;
  spec.heads = 2;
  nn::VisionTransformer<float> source("backbone", spec.dims(3));
  Rng rng(5);
  source.init(rng);
  TensorArchive archive;
  archive.header["kind"] = "backbone";
  nn::ParameterList<float> params;
  source.collect(params);
  export_parameters(params, archive);
  const auto path = std::filesystem::temp_directory_path() / "wcam_model_core_backbone.wcam";
  write_tensor_archive(path, archive);
  spec.weights_path = path.string();

  Backbone<float> loaded(spec, 3);
  const auto images = random_images(1, 42, 6);
  const auto expected = source.forward(images, false);
  EXPECT_TRUE(backbone_extract(images, loaded).data() == expected.patch_tokens.data());
  std::filesystem::remove(path);
}

TEST(HdBranch, OutputMatchesTokenGrid) {
  HdBranch<float> hd("hd", kInputSide, kGridSide);
  Rng rng(1);
  hd.init(rng);
  EXPECT_EQ(hd.forward(random_images(4, kInputSide, 7), Mode::eval).shape(), (Shape4{4, 64, 43, 43}));
}

TEST(HdBranch, ZeroInputWithZeroBiasesGivesZeroOutput) {
  HdBranch<double> hd("hd", kInputSide, kGridSide);
  Rng rng(1);
  hd.init(rng);
  Tensor<double> zeros(2, 3, kInputSide, kInputSide);
  EXPECT_EQ(hd.forward(zeros, Mode::train).data().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(hd.forward(zeros, Mode::eval).data().cwiseAbs().maxCoeff(), 0.0);
}

TEST(HdBranch, ParameterCountMatchesClosedForm) {
  HdBranch<float> hd("hd", kInputSide, kGridSide);
  nn::ParameterList<float> params;
  hd.collect(params);
  // conv weights + conv bias + batch-norm scale and shift, per layer
  const Index layer1 = 32 * 3 * 7 * 7 + 32 + 2 * 32;
  const Index layer2 = 64 * 32 * 3 * 3 + 64 + 2 * 64;
  const Index layer3 = 64 * 64 * 3 * 3 + 64 + 2 * 64;
  EXPECT_EQ(nn::count_parameters(params), layer1 + layer2 + layer3);
  EXPECT_EQ(nn::count_parameters(params), 60480);
}

TEST(HdBranch, MismatchedGridIsConstructionError) {
  EXPECT_THROW(HdBranch<float>("hd", 588, kGridSide), ShapeError);
  EXPECT_THROW(HdBranch<float>("hd", kInputSide, 42), ShapeError);
}

TEST(Fuse, ConcatenatesTokensFirst) {
  Tensor<float> base(2, 768, 43, 43), large(2, 1024, 43, 43), hd(2, 64, 43, 43);
  base.data().setRandom();
  hd.data().setRandom();
  const auto fused = fuse(base, hd);
  EXPECT_EQ(fused.c(), 832);
  EXPECT_EQ(fuse(large, hd).c(), 1088);
  const auto [first, second] = nn::split_channels(fused, 768);
  EXPECT_TRUE(first.data() == base.data());
  EXPECT_TRUE(second.data() == hd.data());
}

TEST(Fuse, SpatialMismatchIsShapeError) {
  EXPECT_THROW(fuse(Tensor<float>(1, 8, 43, 43), Tensor<float>(1, 64, 42, 42)), ShapeError);
}

TEST(SeResidualBlock, SqueezeWidthFollowsReduction) {
  EXPECT_EQ(squeeze_width(832, 8), 104);
  EXPECT_EQ(squeeze_width(96, 8), 12);
  EXPECT_EQ(squeeze_width(5, 8), 1);
  SeResidualBlock<float> block("se", 832, 8);
  EXPECT_EQ(block.squeeze(), 104);
}

TEST(SeResidualBlock, ZeroResidualBranchIsIdentity) {
  SeResidualBlock<double> block("se", 16, 8);
  Rng rng(3);
  block.init(rng);
  block.conv2().conv().weight().value.setZero();
  Tensor<double> x16(2, 16, 6, 6);
  x16.data().setRandom();
  EXPECT_TRUE(block.forward(x16, Mode::train).data() == x16.data());
  EXPECT_TRUE(block.forward(x16, Mode::eval).data() == x16.data());
}

TEST(SeResidualBlock, SaturatedGateAddsUngatedResidual) {
  SeResidualBlock<double> block("se", 16, 8);
  Rng rng(4);
  block.init(rng);
  block.fc2().weight().value.setZero();
  block.fc2().bias().value.setConstant(100.0);
  Tensor<double> x(2, 16, 6, 6);
  x.data().setRandom();
  const auto y = block.forward(x, Mode::eval);
  EXPECT_GT(block.last_gates().minCoeff(), 1.0 - 1e-12);
  const auto residual = block.conv2().forward(block.conv1().forward(x, Mode::eval), Mode::eval);
  EXPECT_LT((y.data() - x.data() - residual.data()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SeResidualBlock, GatesLieInOpenUnitIntervalAndShapeIsPreserved) {
  SeResidualBlock<float> block("se", 24, 8);
  Rng rng(5);
  block.init(rng);
  Tensor<float> x(3, 24, 7, 7);
  x.data().setRandom();
  const auto y = block.forward(x, Mode::train);
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_TRUE((block.last_gates().array() > 0.f).all());
  EXPECT_TRUE((block.last_gates().array() < 1.f).all());
}

TEST(SeResidualBlock, ZeroChannelsIsConstructionError) {
  EXPECT_THROW(SeResidualBlock<float>("se", 0, 8), ConfigError);
}

TEST(RegressionHead, PoolsExactSpatialMean) {
  Tensor<double> x(1, 3, 4, 4);
  for (Index c = 0; c < 3; ++c) x.sample(0).row(c).setConstant(0.5 * (c + 1));
  const auto pooled = nn::global_average_pool(x);
  EXPECT_DOUBLE_EQ(pooled(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(pooled(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(pooled(0, 2), 1.5);
}

TEST(RegressionHead, ZeroWeightsPredictOneHalf) {
  RegressionHead<float> head("head", 832);
  Tensor<float> x(16, 832, 43, 43);
  x.data().setRandom();
  const auto pred = head.forward(x, Mode::eval);
  ASSERT_EQ(pred.size(), 16);
  EXPECT_TRUE((pred.array() == 0.5f).all());
}

TEST(Forward, FullModelPredictionsInUnitInterval) {
  auto model = build_model<float>(tiny_wcamnet());
  const auto pred = model->forward(random_images(16, kInputSide, 10), Mode::eval);
  ASSERT_EQ(pred.size(), 16);
  EXPECT_TRUE((pred.array() > 0.f).all() && (pred.array() < 1.f).all());
}

TEST(Forward, WithoutHdBranchFirstSeBlockSeesBackboneWidth) {
  auto config = tiny_wcamnet(kBaseEmbedDim);
  config.use_hd_branch = false;
  WCamNet<float> model(config);
  model.forward(random_images(1, kInputSide, 11), Mode::eval);
  EXPECT_EQ(model.trace().se_input_channels, 768);
  EXPECT_EQ(model.se_block(0).channels(), 768);
}

TEST(Forward, WithoutSeBlocksHeadSeesFusedMap) {
  auto config = tiny_wcamnet(kBaseEmbedDim);
  config.use_se_blocks = false;
  WCamNet<float> model(config);
  model.forward(random_images(1, kInputSide, 12), Mode::eval);
  EXPECT_EQ(model.trace().head_input, (Shape4{1, 832, 43, 43}));
  EXPECT_EQ(model.head().channels(), 832);
}

TEST(Forward, OutputRangeProperty) {
  // Extreme parameter scales must still give predictions strictly inside (0, 1).
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto config = tiny_wcamnet(8);
    config.grid_side = 3;
    config.init_seed = seed;
    WCamNet<float> model(config);
    for (auto* p : model.parameters())
      if (!p->buffer) p->value *= static_cast<float>(1 + 50 * seed);
    const auto pred = model.forward(random_images(4, 42, seed), seed % 2 ? Mode::train : Mode::eval);
    EXPECT_TRUE((pred.array() > 0.f).all() && (pred.array() < 1.f).all()) << pred.transpose();
  }
}

TEST(BuildModel, WCamNetTrainableSetExcludesBackbone) {
  auto model = build_model<float>("wcamnet", tiny_wcamnet());
  const auto trainable = model->trainable_parameters();
  for (auto* p : model->backbone_parameters()) {
    EXPECT_FALSE(p->trainable);
    EXPECT_EQ(std::count(trainable.begin(), trainable.end(), p), 0) << p->name;
  }
  EXPECT_GT(trainable.size(), 0u);
}

TEST(BuildModel, LinearHeadHasOneWeightMatrixOverAllTokens) {
  ModelConfig c = desk_config(Architecture::backbone_linear_head);
  c.backbone = BackboneSpec::tiny(kBaseEmbedDim);
  auto model = build_model<float>(c);
  const auto trainable = model->trainable_parameters();
  ASSERT_EQ(trainable.size(), 2u);
  EXPECT_EQ(trainable[0]->shape, (std::vector<Index>{1, 43 * 43 * 768 + 768}));
  EXPECT_EQ(trainable[1]->shape, (std::vector<Index>{1}));
}

TEST(BuildModel, VitFineTuneTrainsEverything) {
  auto model = build_model<float>(desk_config(Architecture::vit_full_finetune));
  const auto all = model->parameters();
  EXPECT_EQ(nn::count_parameters(all, true), nn::count_parameters(all, false));
  EXPECT_FALSE(model->backbone_parameters().empty());
}

TEST(BuildModel, UnknownArchitectureListsValidNames) {
  try {
    build_model<float>("alexnet", tiny_wcamnet());
    FAIL() << "expected RegistryError";
  } catch (const RegistryError& e) {
    const std::string msg = e.what();
    for (const auto& name : registered_architectures()) EXPECT_NE(msg.find(name), std::string::npos) << name;
  }
}

TEST(BuildModel, EveryRegisteredArchitectureProducesUnitIntervalPredictions) {
  const auto images = random_images(2, kInputSide, 13);
  for (const auto& name : registered_architectures()) {
    auto model = build_model<float>(desk_config(parse_architecture(name)));
    const auto pred = model->forward(images, Mode::eval);
    ASSERT_EQ(pred.size(), 2) << name;
    EXPECT_TRUE((pred.array() > 0.f).all() && (pred.array() < 1.f).all()) << name;
  }
}

TEST(GradientCheck, HeadAndSeParametersMatchFiniteDifferences) {
  // Reduced topology: 8x8 token grid (112 px input), 8-wide tiny backbone.
  ModelConfig config = tiny_wcamnet(8);
  config.grid_side = 8;
  WCamNet<double> model(config);
  const auto images = random_images(3, 112, 14).cast<double>();
  Vector<double> target(3);
  target << 0.1, 0.5, 0.9;
  auto loss = [&] { return (model.forward(images, Mode::train) - target).squaredNorm() / 3.0; };

  model.zero_grad();
  const auto pred = model.forward(images, Mode::train);
  model.backward(2.0 * (pred - target) / 3.0);
  nn::ParameterList<double> checked;
  for (auto* p : model.trainable_parameters())
    if (p->name.rfind("se", 0) == 0 || p->name.rfind("head", 0) == 0) checked.push_back(p);
  std::vector<Vector<double>> analytic;
  for (auto* p : checked) analytic.push_back(p->grad);
  const auto r = testing::finite_difference_check(checked, analytic, loss, 8, 1e-4, 99);
  EXPECT_GE(r.pass_rate(), 0.95) << "worst " << r.worst;
}

TEST(GradientCheck, HdBranchAndBaselinesMatchFiniteDifferences) {
  struct Case {
    ModelConfig config;
    Index side;
  };
  std::vector<Case> cases;
  {
    ModelConfig c = tiny_wcamnet(8);
    c.grid_side = 4;
    cases.push_back({c, 56});
  }
  for (auto arch : {Architecture::resnet50_style, Architecture::vgg19_style, Architecture::vit_full_finetune,
                    Architecture::backbone_linear_head}) {
    ModelConfig c = desk_config(arch);
    c.grid_side = 4;
    c.width_divisor = 32;
    if (arch == Architecture::vit_full_finetune) c.backbone = BackboneSpec::tiny(8, 1, 2), c.backbone.frozen = false;
    cases.push_back({c, 56});
  }
  for (auto& cs : cases) {
    auto model = build_model<double>(cs.config);
    const auto images = random_images(2, cs.side, 15).cast<double>();
    Vector<double> target(2);
    target << 0.2, 0.7;
    auto loss = [&] { return (model->forward(images, Mode::train) - target).squaredNorm() / 2.0; };
    model->zero_grad();
    model->backward((model->forward(images, Mode::train) - target));
    const auto params = model->trainable_parameters();
    std::vector<Vector<double>> analytic;
    for (auto* p : params) analytic.push_back(p->grad);
    // Deep max-pool/ReLU stacks switch branches within a 1e-6 perturbation, so
    // use a smaller step and a noise floor to match.
    const auto r = testing::finite_difference_check(params, analytic, loss, 3, 1e-4, 7, 1e-8, 1e-6);
    EXPECT_GE(r.pass_rate(), 0.95) << to_string(cs.config.architecture) << " worst " << r.worst;
  }
}

TEST(Checkpoint, RoundTripRestoresPredictions) {
  auto config = tiny_wcamnet(8);
  config.grid_side = 4;
  auto model = build_model<float>(config);
  const auto images = random_images(2, 56, 16);
  model->forward(images, Mode::train);  // move running statistics off their defaults
  const auto before = model->forward(images, Mode::eval);
  data::Normalization norm{{0.4, 0.5, 0.6}, {0.2, 0.25, 0.3}};
  const auto path = std::filesystem::temp_directory_path() / "wcam_ckpt_roundtrip.wcam";
  save_checkpoint(path, *model, norm, {{"note", "unit"}});
  auto loaded = load_checkpoint<float>(path);
  EXPECT_EQ(loaded.normalization, norm);
  EXPECT_EQ(loaded.metadata.at("note"), "unit");
  EXPECT_TRUE(loaded.model->forward(images, Mode::eval) == before);

  auto other = config;
  other.use_se_blocks = false;
  EXPECT_THROW(load_checkpoint<float>(path, &other), CheckpointError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsForeignFiles) {
  const auto path = std::filesystem::temp_directory_path() / "wcam_not_a_ckpt.bin";
  {
    std::ofstream(path) << "hello";
  }
  EXPECT_THROW(load_checkpoint<float>(path), CheckpointError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace wcam::model
