#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "support/temp_dir.hpp"
#include "wcam/data/sampling.hpp"
#include "wcam/eval/evaluate.hpp"
#include "wcam/eval/experiments.hpp"
#include "wcam/eval/histogram.hpp"
#include "wcam/eval/pca.hpp"
#include "wcam/eval/render.hpp"
#include "wcam/synth/scene.hpp"
#include "wcam/train/loss.hpp"
#include "wcam/util/random.hpp"

namespace wcam::eval {
namespace {

using Vec = std::vector<double>;

Vec random_vec(Rng& rng, std::size_t n) {
  Vec v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

Eigen::Map<const Eigen::ArrayXd> arr(const Vec& v) { return {v.data(), static_cast<Eigen::Index>(v.size())}; }

const data::DatasetManifest& small_dataset() {
  static testing::TempDir dir("wcam_eval_data");
  static const auto manifest = synth::generate_dataset(48, 6, 21, dir.path(), {.width = 96, .height = 64});
  return manifest;
}

train::TrainConfig small_config() {
  auto c = train::recipe(model::Architecture::wcamnet);
  c.model.grid_side = 4;
  c.epochs = 2;
  c.batch_size = 8;
  return c;
}

TEST(Metrics, HandExamples) {
  EXPECT_NEAR(mae(Vec{0.5, 0.5}, Vec{0.4, 0.6}), 0.1, 1e-15);
  EXPECT_EQ(mae(Vec{0.3, 0.7}, Vec{0.3, 0.7}), 0.0);
  EXPECT_EQ(rmse(Vec{1, 0}, Vec{0, 1}), 1.0);
  Rng rng(1);
  const auto t = random_vec(rng, 50);
  for (double d : {0.25, -0.1}) {
    Vec p = t;
    for (auto& x : p) x += d;
    EXPECT_NEAR(rmse(p, t), std::abs(d), 1e-12);
  }
  EXPECT_THROW(mae(Vec{}, Vec{}), ArgumentError);
  EXPECT_THROW(rmse(Vec{}, Vec{}), ArgumentError);
  EXPECT_THROW(mae(Vec{1}, Vec{1, 2}), ArgumentError);
}

TEST(Metrics, MatchIndependentOracles) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 1000));
    const auto p = random_vec(rng, n), y = random_vec(rng, n);
    const double o_mae = (arr(p) - arr(y)).abs().mean();
    const double o_mse = (arr(p) - arr(y)).square().mean();
    EXPECT_NEAR(mae(p, y), o_mae, 1e-12);
    EXPECT_NEAR(rmse(p, y), std::sqrt(o_mse), 1e-12);
    EXPECT_NEAR(train::mse_loss(p, y), o_mse, 1e-12);
    EXPECT_NEAR(rmse(p, y) * rmse(p, y), train::mse_loss(p, y), 1e-12);
    EXPECT_GE(rmse(p, y), mae(p, y));
  }
}

TEST(MetricsReport, EnforcesRmseAtLeastMae) {
  EXPECT_THROW(MetricsReport("m", 0.2, 0.1, 10, "test"), ValidationError);
  EXPECT_THROW(MetricsReport("m", -0.1, 0.1, 10, "test"), ValidationError);
  EXPECT_THROW(MetricsReport("m", NAN, 0.1, 10, "test"), ValidationError);
  EXPECT_NO_THROW(MetricsReport("m", 0.1, 0.1, 10, "test"));
  const MetricsReport r("m", 0.1, 0.2, 10, "test", "abc");
  EXPECT_EQ(nlohmann::json(r).get<MetricsReport>(), r);
}

TEST(MetricsReport, PerfectAndConstantPredictors) {
  Rng rng(3);
  Vec t(200000);
  for (auto& x : t) x = rng.uniform();
  const auto perfect = MetricsReport::from_predictions("perfect", t, t, "test");
  EXPECT_EQ(perfect.mae, 0.0);
  EXPECT_EQ(perfect.rmse, 0.0);
  const Vec half(t.size(), 0.5);
  const auto c = MetricsReport::from_predictions("constant", half, t, "test");
  EXPECT_NEAR(c.mae, 0.25, 0.003);
  EXPECT_NEAR(c.rmse, 1.0 / std::sqrt(12.0), 0.003);
  EXPECT_EQ(c.count, t.size());
}

class Evaluate : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("wcam_eval_ckpt");
    train::TrainOptions o;
    o.output_dir = dir_->path();
    report_ = new train::RunReport(train::train(small_config(), small_dataset(), o).report);
  }
  static void TearDownTestSuite() {
    delete report_;
    delete dir_;
  }
  static std::filesystem::path ckpt() { return dir_->path() / "best.ckpt"; }

  static testing::TempDir* dir_;
  static train::RunReport* report_;
};

testing::TempDir* Evaluate::dir_ = nullptr;
train::RunReport* Evaluate::report_ = nullptr;

TEST_F(Evaluate, IsIdempotentAndCarriesConfigHash) {
  const auto a = evaluate(ckpt(), small_dataset(), data::Split::test);
  const auto b = evaluate(ckpt(), small_dataset(), data::Split::test);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.config_hash, report_->config_hash);
  EXPECT_EQ(a.split, "test");
  EXPECT_EQ(a.model, "wcamnet");
  EXPECT_EQ(a.count, small_dataset().indices(data::Split::test).size());
  EXPECT_GT(a.mae, 0.0);
  EXPECT_GE(a.rmse, a.mae);
  const auto val = evaluate(ckpt(), small_dataset(), data::Split::val);
  EXPECT_EQ(val.mae, report_->best_val_mae);
}

TEST_F(Evaluate, MatchesDirectPrediction) {
  auto loaded = model::load_checkpoint<float>(ckpt());
  const auto p = predict(*loaded.model, small_dataset(), data::Split::test);
  EXPECT_EQ(evaluate(ckpt(), small_dataset(), data::Split::test).mae, mae(p.preds, p.targets));
}

TEST_F(Evaluate, RejectsMismatchedConfigAndEmptySplit) {
  auto other = small_config().model;
  other.use_se_blocks = false;
  EvaluateOptions o;
  o.expected_config = &other;
  EXPECT_THROW(evaluate(ckpt(), small_dataset(), data::Split::test, o), CheckpointError);
  auto same = small_config().model;
  o.expected_config = &same;
  EXPECT_NO_THROW(evaluate(ckpt(), small_dataset(), data::Split::test, o));

  auto manifest = small_dataset();
  for (auto& [station, split] : manifest.splits)
    if (split == data::Split::test) split = data::Split::train;
  EXPECT_THROW(evaluate(ckpt(), manifest, data::Split::test), ConfigError);
  EXPECT_THROW(evaluate(dir_->path() / "missing.ckpt", small_dataset(), data::Split::test), Error);
}

MetricsReport fake(const std::string& name, double mae, double rmse) {
  return MetricsReport(name, mae, rmse, 10, "test");
}

TEST(Benchmark, EntriesCoverTheSixArchitectures) {
  const auto entries = benchmark_entries(model::desk_config(model::Architecture::wcamnet));
  ASSERT_EQ(entries.size(), 6u);
  EXPECT_EQ(entries[0].name, "wcamnet");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(entries[i].name, model::registered_architectures()[i]);
    EXPECT_EQ(model::to_string(entries[i].config.model.architecture), entries[i].name);
    ASSERT_TRUE(entries[i].reference);
    EXPECT_NO_THROW(entries[i].config.validate());
  }
  EXPECT_EQ(entries[0].reference->mae, 0.150);
  EXPECT_EQ(entries[0].reference->rmse, 0.195);
  const auto& vit = entries[5].config.model;
  EXPECT_FALSE(vit.backbone.frozen);
  EXPECT_GE(vit.backbone.depth, 1);
  EXPECT_TRUE(entries[4].config.model.backbone.frozen);
  EXPECT_EQ(entries[0].config.epochs, 15);
  EXPECT_EQ(entries[3].config.epochs, 30);
}

TEST(Benchmark, FailedRowsAreKeptAndBestIsBolded) {
  auto entries = benchmark_entries(model::desk_config(model::Architecture::wcamnet));
  ExperimentOptions o;
  o.runner = [](const ExperimentEntry& e, std::uint64_t) {
    if (e.name == "resnet152-style") throw TrainingDiverged("non-finite loss");
    if (e.name == "wcamnet") return fake(e.name, 0.10, 0.14);
    if (e.name == "vgg19-style") return fake(e.name, 0.12, 0.13);
    return fake(e.name, 0.2, 0.25);
  };
  const auto t = run_benchmark(entries, small_dataset(), o);
  ASSERT_EQ(t.rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(t.rows[i].name, entries[i].name);
  EXPECT_TRUE(t.row("resnet152-style").failed());
  EXPECT_TRUE(std::isnan(t.row("resnet152-style").mae()));
  EXPECT_EQ(t.best_mae_rows(), std::vector<std::size_t>{0});
  EXPECT_EQ(t.best_rmse_rows(), std::vector<std::size_t>{3});
  const auto md = t.markdown();
  EXPECT_NE(md.find("| wcamnet | **0.1000** | 0.1400 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| vgg19-style | 0.1200 | **0.1300** |"), std::string::npos) << md;
  EXPECT_NE(md.find("| resnet152-style | failed | failed | 0/1 |"), std::string::npos) << md;
  EXPECT_NE(md.find("non-finite loss"), std::string::npos);
  const nlohmann::json j = t;
  EXPECT_EQ(j["rows"].size(), 6u);
  EXPECT_TRUE(j["rows"][2]["failed"].get<bool>());
  EXPECT_TRUE(j["rows"][0]["best_mae"].get<bool>());
}

TEST(Benchmark, TiesAreAllBolded) {
  ComparisonTable t{"t", {}};
  for (const char* n : {"a", "b"}) {
    ComparisonRow r;
    r.name = n;
    r.runs.push_back(fake(n, 0.1, 0.2));
    r.seeds.push_back(1);
    t.rows.push_back(r);
  }
  EXPECT_EQ(t.best_mae_rows(), (std::vector<std::size_t>{0, 1}));
  ComparisonTable failed{"f", {ComparisonRow{"x", {}, {}, {"boom"}, {}}}};
  EXPECT_TRUE(failed.best_mae_rows().empty());
}

TEST(Benchmark, DeskRunKeepsMaeInSanityBand) {
  auto base = model::desk_config(model::Architecture::wcamnet);
  base.grid_side = 4;
  ExperimentOptions o;
  o.epochs = 2;
  testing::TempDir out("wcam_bench");
  o.output_dir = out.path();
  const auto t = run_benchmark(benchmark_entries(base), small_dataset(), o);
  ASSERT_EQ(t.rows.size(), 6u);
  for (const auto& r : t.rows) {
    ASSERT_FALSE(r.failed()) << r.name << ": " << (r.errors.empty() ? "" : r.errors[0]);
    EXPECT_GT(r.mae(), 0.0) << r.name;
    EXPECT_LT(r.mae(), 0.5) << r.name;
    EXPECT_TRUE(std::filesystem::exists(out / r.name / "seed1" / "best.ckpt")) << r.name;
  }
  write_table(t, out.path(), "benchmark");
  for (const char* ext : {".json", ".md", ".png"}) EXPECT_TRUE(std::filesystem::exists(out / ("benchmark" + std::string(ext))));
  const auto img = data::read_image(out / "benchmark.png");
  EXPECT_EQ(img.width, 960);

  // scoring from checkpoints reproduces the trained rows
  ExperimentOptions from_ckpt;
  for (const auto& r : t.rows) from_ckpt.checkpoints[r.name] = out / r.name / "seed1" / "best.ckpt";
  from_ckpt.runner = {};
  const auto again = run_benchmark(benchmark_entries(base), small_dataset(), from_ckpt);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(again.rows[i].mae(), t.rows[i].mae()) << t.rows[i].name;
}

TEST(Ablations, RowsAndVariants) {
  const auto entries = ablation_entries(small_config());
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].name, "wcamnet");
  EXPECT_EQ(entries[1].name, "wcamnet-large-backbone");
  EXPECT_EQ(entries[2].name, "wcamnet-no-se");
  EXPECT_EQ(entries[3].name, "wcamnet-no-hd");
  EXPECT_EQ(entries[1].config.model.backbone.embed_dim, kDeskLargeEmbedDim);
  EXPECT_FALSE(entries[2].config.model.use_se_blocks);
  EXPECT_FALSE(entries[3].config.model.use_hd_branch);

  auto count = [](const train::TrainConfig& c) {
    auto m = model::build_model<float>(c.model);
    std::size_t n = 0;
    for (const auto* p : m->parameters()) n += static_cast<std::size_t>(p->size());
    return n;
  };
  EXPECT_LT(count(entries[2].config), count(entries[0].config));
  EXPECT_LT(count(entries[3].config), count(entries[0].config));

  auto pretrained = small_config();
  pretrained.model.backbone = model::BackboneSpec::pretrained_base("base.bin");
  const auto p = ablation_entries(pretrained, "large.bin");
  EXPECT_EQ(p[1].config.model.backbone.kind, model::BackboneKind::pretrained_large);
  EXPECT_EQ(p[1].config.model.backbone.weights_path, "large.bin");
  EXPECT_THROW(ablation_entries(train::recipe(model::Architecture::vgg19_style)), ConfigError);
}

TEST(Ablations, SeedsAndDirectionChecks) {
  ExperimentOptions o;
  o.seeds = {1, 2, 3};
  std::vector<std::pair<std::string, std::uint64_t>> calls;
  o.runner = [&](const ExperimentEntry& e, std::uint64_t seed) {
    calls.emplace_back(e.name, seed);
    const auto c = run_config(e, seed, o);
    EXPECT_EQ(c.seed, seed);
    EXPECT_EQ(c.model.init_seed, seed);
    double m = 0.1;
    if (e.name == "wcamnet-no-hd") m = seed == 2 ? 0.09 : 0.13;
    if (e.name == "wcamnet-no-se" && seed == 3) throw TrainingDiverged("nan");
    return fake(e.name, m, m + 0.05);
  };
  const auto t = run_ablations(small_config(), small_dataset(), o);
  EXPECT_EQ(calls.size(), 12u);
  const auto hd = compare_rows(t.row("wcamnet"), t.row("wcamnet-no-hd"));
  EXPECT_EQ(hd.seeds_compared, 3);
  EXPECT_EQ(hd.seeds_held, 2);
  EXPECT_TRUE(hd.majority_holds());
  EXPECT_TRUE(hd.mean_holds());
  const auto se = compare_rows(t.row("wcamnet"), t.row("wcamnet-no-se"));
  EXPECT_EQ(se.seeds_compared, 2);
  EXPECT_EQ(t.row("wcamnet-no-se").errors.size(), 1u);
  EXPECT_NE(t.markdown().find("| wcamnet-no-se | **0.1000** | **0.1500** | 2/3 |"), std::string::npos) << t.markdown();
}

TEST(Ablations, DeskRunProducesFourRows) {
  ExperimentOptions o;
  o.seeds = {1, 2};
  o.epochs = 1;
  const auto t = run_ablations(small_config(), small_dataset(), o);
  ASSERT_EQ(t.rows.size(), 4u);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.runs.size(), 2u) << r.name;
    EXPECT_GT(r.mae(), 0.0);
    EXPECT_LT(r.mae(), 0.5);
  }
}

Eigen::MatrixXd anisotropic_tokens(int p, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(p, d);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal() * (1.0 + 3.0 / (1 + j)) + 0.5 * j;
  // mix the axes so components are not coordinate-aligned
  Eigen::MatrixXd mix(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) mix(i, j) = rng.normal();
  return x * mix;
}

TEST(Pca, MatchesEigendecompositionOracle) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto x = anisotropic_tokens(300, 12, seed);
    const auto r = pca3(x);
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / (x.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    ASSERT_EQ(r.rank, 3);
    EXPECT_TRUE(r.warning.empty());
    for (int k = 0; k < 3; ++k) {
      const auto col = 11 - k;  // eigenvalues ascend
      const Eigen::VectorXd oracle = c * es.eigenvectors().col(col);
      const double same = (r.scores.col(k) - oracle).cwiseAbs().maxCoeff();
      const double flipped = (r.scores.col(k) + oracle).cwiseAbs().maxCoeff();
      EXPECT_LT(std::min(same, flipped), 1e-6) << "component " << k;
      EXPECT_NEAR(r.explained_variance[k], es.eigenvalues()[col], 1e-9 * es.eigenvalues()[11]);
    }
  }
}

TEST(Pca, OrderingOrthogonalityAndSign) {
  const auto r = pca3(anisotropic_tokens(200, 20, 7));
  EXPECT_GE(r.explained_variance[0], r.explained_variance[1]);
  EXPECT_GE(r.explained_variance[1], r.explained_variance[2]);
  for (int a = 0; a < 3; ++a) {
    EXPECT_NEAR(r.components.col(a).norm(), 1.0, 1e-10);
    Eigen::Index arg = 0;
    r.components.col(a).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(r.components(arg, a), 0.0);
    for (int b = a + 1; b < 3; ++b) EXPECT_LT(std::abs(r.components.col(a).dot(r.components.col(b))), 1e-8);
  }
  // sign convention makes the result invariant to flipping the input's orientation
  const auto again = pca3(anisotropic_tokens(200, 20, 7));
  EXPECT_EQ(again.scores, r.scores);
}

TEST(Pca, RankDeficientPadsWithZeros) {
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(50, -1, 1);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::LinSpaced(6, 1, 2);
  const Eigen::MatrixXd x = (a * b).rowwise() + Eigen::RowVectorXd::Constant(6, 3.0);
  const auto r = pca3(x);
  EXPECT_EQ(r.rank, 1);
  EXPECT_FALSE(r.warning.empty());
  EXPECT_EQ(r.components.col(1).norm(), 0.0);
  EXPECT_EQ(r.scores.col(2).norm(), 0.0);
  EXPECT_EQ(r.explained_variance[2], 0.0);
  const auto scaled = scale_scores(r.scores);
  EXPECT_EQ(scaled.col(1).norm(), 0.0);
  EXPECT_EQ(scaled.col(0).minCoeff(), 0.0);
  EXPECT_EQ(scaled.col(0).maxCoeff(), 1.0);
  const auto constant = pca3(Eigen::MatrixXd::Constant(10, 4, 2.0));
  EXPECT_EQ(constant.rank, 0);
  EXPECT_THROW(pca3(Eigen::MatrixXd::Ones(1, 4)), ArgumentError);
}

TEST(Pca, TokenVisualizationOfTinyBackbone) {
  model::Backbone<float> backbone(model::BackboneSpec::tiny(), model::kGridSide);
  synth::SceneSpec spec;
  spec.width = 160;
  spec.height = 90;
  spec.friction = 0.3;
  const auto image = synth::generate_scene(spec);
  const auto v = pca_token_visualization(image, backbone, model::kGridSide, {}, 2);
  EXPECT_EQ(v.image.width, 86);
  EXPECT_EQ(v.image.height, 86);
  EXPECT_EQ(v.pca.scores.rows(), 43 * 43);
  EXPECT_EQ(v.pca.rank, 3);
  const auto scaled = scale_scores(v.pca.scores);
  EXPECT_GE(scaled.minCoeff(), 0.0);
  EXPECT_LE(scaled.maxCoeff(), 1.0);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(scaled.col(c).maxCoeff(), 1.0);
  const auto again = pca_token_visualization(image, backbone, model::kGridSide, {}, 2);
  EXPECT_EQ(again.image, v.image);
  EXPECT_EQ(render_scores(scaled, 43, 1).width, 43);
}

data::DatasetManifest planned_manifest(int n, std::uint64_t seed) {
  data::DatasetManifest m;
  m.samples = synth::plan_dataset(n, 10, seed).samples;
  return m;
}

TEST(Histograms, CountsMatchLoopOracle) {
  const auto m = planned_manifest(1000, 5);
  const auto h = friction_histograms(m, {.bins = 10, .resample_target = 0, .seed = 3});
  std::vector<std::size_t> oracle(10, 0);
  for (const auto& s : m.samples) {
    int b = static_cast<int>(s.friction_factor * 10);
    if (b == 10) b = 9;
    ++oracle[static_cast<std::size_t>(b)];
  }
  EXPECT_EQ(h.before, oracle);
  std::size_t before = 0, after = 0;
  for (auto c : h.before) before += c;
  for (auto c : h.after) after += c;
  EXPECT_EQ(before, 1000u);
  EXPECT_EQ(after, 500u);
  EXPECT_FALSE(h.from_build);
  EXPECT_EQ(h.edges.front(), 0.0);
  EXPECT_EQ(h.edges.back(), 1.0);
}

TEST(Histograms, UniformSyntheticDataIsFlat) {
  // chi-square critical value, 9 degrees of freedom, alpha = 0.001
  const auto h = friction_histograms(planned_manifest(1000, 17));
  double chi2 = 0;
  for (auto c : h.before) chi2 += (static_cast<double>(c) - 100.0) * (static_cast<double>(c) - 100.0) / 100.0;
  EXPECT_LT(chi2, 27.88);
}

TEST(Histograms, BuildResamplingIsReported) {
  synth::DatasetOptions so;
  so.skewed = true;
  const auto plan = synth::plan_dataset(400, 8, 9, so);
  data::DatasetManifest m;
  m.samples = data::weighted_resample(plan.samples, 10, 150, 4);
  m.info = {{"bins", 10},
            {"input_samples", plan.samples.size()},
            {"histogram_before", data::friction_histogram(plan.samples, 10)}};
  const auto h = friction_histograms(m);
  EXPECT_TRUE(h.from_build);
  EXPECT_EQ(h.before, data::friction_histogram(plan.samples, 10));
  EXPECT_EQ(h.after, data::friction_histogram(m.samples, 10));
  EXPECT_LT(data::occupied_bin_ratio(h.after), data::occupied_bin_ratio(h.before));
}

TEST(Histograms, PlotWritesImageAndCounts) {
  testing::TempDir out("wcam_hist");
  const auto m = planned_manifest(300, 2);
  const auto h = plot_histograms(m, out.path());
  const auto img = data::read_image(out / "friction_histogram.png");
  EXPECT_EQ(img.width, 960);
  EXPECT_EQ(img.height, 540);
  std::ifstream in(out / "friction_histogram.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["before"].get<std::vector<std::size_t>>(), h.before);
  EXPECT_EQ(j["samples_before"], 300);
  EXPECT_THROW(friction_histograms(data::DatasetManifest{}), ArgumentError);
}

TEST(Render, GlyphsAndCharts) {
  EXPECT_EQ(&glyph('a'), &glyph('A'));
  EXPECT_EQ(&glyph('~'), &glyph('?'));
  EXPECT_EQ(Canvas::text_width("AB"), 11);
  Canvas c(20, 10);
  c.text(0, 0, "I");
  EXPECT_EQ(c.image().at(2, 3, 0), 0);   // stem of the I
  EXPECT_EQ(c.image().at(0, 3, 0), 255);
  const auto chart = bar_chart("t", {"a", "b"}, {{"s", {1.0, NAN}}}, 200, 100);
  EXPECT_EQ(chart.width, 200);
  EXPECT_THROW(bar_chart("t", {"a"}, {{"s", {1.0, 2.0}}}), ArgumentError);
  const auto line = line_chart("l", "epoch", {{"loss", {0, 1, 2}, {0.3, 0.2, 0.1}}}, 300, 200);
  EXPECT_EQ(line.height, 200);
  EXPECT_THROW(line_chart("l", "x", {{"y", {0}, {NAN}}}), ArgumentError);
  EXPECT_EQ(format_number(0.1234567), "0.123");
  EXPECT_EQ(format_number(NAN), "n/a");
}

}  // namespace
}  // namespace wcam::eval
