// Acceptance checks, one PASS/FAIL line each. Pass criterion ids as arguments
// to run a subset.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "support/grad_check.hpp"
#include "support/stub_server.hpp"
#include "support/temp_dir.hpp"
#include "wcam/data/labels.hpp"
#include "wcam/data/sampling.hpp"
#include "wcam/eval/evaluate.hpp"
#include "wcam/eval/experiments.hpp"
#include "wcam/eval/metrics.hpp"
#include "wcam/eval/pca.hpp"
#include "wcam/ingest/collector.hpp"
#include "wcam/synth/scene.hpp"
#include "wcam/train/loss.hpp"
#include "wcam/train/trainer.hpp"

namespace wcam {
namespace {

using model::Architecture;
using model::Mode;
using nn::Shape4;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed condition; returns it so callers can stop early.
  bool check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
    return ok;
  }
};

struct Criterion {
  int id;
  std::string name;
  std::function<void(Outcome&)> run;
};

nn::Tensor<float> random_images(nn::Index n, nn::Index side, std::uint64_t seed) {
  nn::Tensor<float> t(n, 3, side, side);
  Rng rng(seed);
  for (nn::Index i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<float>(rng.normal());
  return t;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Forward shapes with a base-width (768) tiny backbone at the full 43x43 grid.
void shapes(Outcome& o) {
  auto config = model::desk_config(Architecture::wcamnet);
  config.backbone = model::BackboneSpec::tiny(model::kBaseEmbedDim);
  model::WCamNet<float> net(config);
  for (nn::Index b : {1, 16}) {
    const auto pred = net.forward(random_images(b, model::kInputSide, 100 + b), Mode::eval);
    const auto& t = net.trace();
    o.check(t.tokens == (Shape4{b, 768, 43, 43}), "token grid shape at batch " + std::to_string(b));
    o.check(t.hd == (Shape4{b, 64, 43, 43}), "hd shape at batch " + std::to_string(b));
    o.check(t.fused == (Shape4{b, 832, 43, 43}), "fused shape at batch " + std::to_string(b));
    o.check(pred.size() == b, "prediction length at batch " + std::to_string(b));
    o.check((pred.array() > 0.f).all() && (pred.array() < 1.f).all(), "predictions outside (0, 1)");
  }
  o.detail << "batches 1 and 16: tokens (B,768,43,43), hd (B,64,43,43), fused (B,832,43,43), pred (B,) in (0,1)";
}

// Ten steps on random data; backbone bitwise fixed, every trainable block moves.
void frozen_backbone(Outcome& o) {
  auto config = train::recipe(Architecture::wcamnet);
  config.model.grid_side = 8;
  auto m = model::build_model<float>(config.model);
  std::map<std::string, nn::Vector<float>> before;
  for (auto* p : m->parameters()) before[p->name] = p->value;
  train::Trainer trainer(config, *m, 10);
  Rng rng(3);
  for (int s = 0; s < 10; ++s) {
    data::Batch batch{random_images(4, m->input_side(), 200 + s), nn::Vector<float>(4), {}};
    for (int i = 0; i < 4; ++i) batch.targets[i] = static_cast<float>(rng.uniform());
    trainer.step(batch);
  }
  std::map<std::string, int> changed;
  int backbone_params = 0;
  for (auto* p : m->parameters()) {
    const std::string group = p->name.substr(0, p->name.find('.'));
    const bool same = p->value.size() == before[p->name].size() &&
                      std::memcmp(p->value.data(), before[p->name].data(), sizeof(float) * p->value.size()) == 0;
    if (group == "backbone") {
      ++backbone_params;
      o.check(same, p->name + " changed");
    } else if (!same && !p->buffer) {
      ++changed[group];
    }
  }
  o.check(backbone_params > 0, "no backbone parameters found");
  for (const char* group : {"hd", "se1", "se2", "head"})
    o.check(changed[group] > 0, std::string("nothing changed in ") + group);
  o.detail << backbone_params << " backbone tensors bitwise unchanged; changed tensors: hd " << changed["hd"]
           << ", se1 " << changed["se1"] << ", se2 " << changed["se2"] << ", head " << changed["head"];
}

// Head and SE gradients against central differences on an 8x8 grid.
void gradient_check(Outcome& o) {
  auto config = model::desk_config(Architecture::wcamnet);
  config.backbone = model::BackboneSpec::tiny(8);
  config.grid_side = 8;
  model::WCamNet<double> net(config);
  const auto images = random_images(3, 112, 14).cast<double>();
  nn::Vector<double> target(3);
  target << 0.1, 0.5, 0.9;
  auto loss = [&] { return train::mse_loss(net.forward(images, Mode::train), target); };
  net.zero_grad();
  const auto pred = net.forward(images, Mode::train);
  net.backward(train::mse_loss_grad(pred, target));
  nn::ParameterList<double> checked;
  for (auto* p : net.trainable_parameters())
    if (p->name.rfind("se", 0) == 0 || p->name.rfind("head", 0) == 0) checked.push_back(p);
  std::vector<nn::Vector<double>> analytic;
  for (auto* p : checked) analytic.push_back(p->grad);
  const auto r = testing::finite_difference_check(checked, analytic, loss, 16, 1e-4, 99, 1e-6, 1e-11);
  o.check(r.checked > 0 && r.pass_rate() >= 0.95, "pass rate " + fmt(r.pass_rate()));
  o.detail << r.passed << "/" << r.checked << " coordinates within 1e-4 (" << fmt(100 * r.pass_rate())
           << "%), worst relative error " << fmt(r.worst);
}

// 32 synthetic samples, 200 steps, training-set MAE.
void overfit(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  testing::TempDir dir("wcam_accept_overfit");
  auto manifest = synth::generate_dataset(32, 4, 21, dir.path(), {.width = 160, .height = 90, .workers = 1});
  for (auto& [station, split] : manifest.splits) split = data::Split::train;

  auto config = train::recipe(Architecture::wcamnet);
  config.model.grid_side = 16;
  config.base_lr = 0.05;
  config.weight_decay = 0.0;
  config.schedule = train::ScheduleSpec::cosine(1000);
  auto m = model::build_model<float>(config.model);
  data::LoaderOptions lo;
  lo.side = static_cast<int>(m->input_side());
  const data::DataLoader loader(manifest, data::Split::train, lo);
  std::vector<std::size_t> idx(32);
  std::iota(idx.begin(), idx.end(), 0);
  const auto batch = loader.load(idx, 0);

  train::Trainer trainer(config, *m, 1);
  const double first = trainer.step(batch);
  for (int s = 1; s < 200; ++s) trainer.step(batch);
  const auto pred = m->forward(batch.images, Mode::eval);
  std::vector<double> p(pred.begin(), pred.end()), t(batch.targets.begin(), batch.targets.end());
  const double train_mae = eval::mae(p, t);
  const double secs = seconds_since(t0);
  o.check(train_mae < 0.05, "train MAE " + fmt(train_mae) + " >= 0.05");
  o.check(secs < 300, "took " + fmt(secs) + " s");
  o.detail << "train MAE " << fmt(train_mae) << " after 200 steps (first loss " << fmt(first) << "), " << fmt(secs)
           << " s";
}

// 500 synthetic samples, station-grouped splits, 15 epochs at the full grid.
void end_to_end(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  testing::TempDir dir("wcam_accept_e2e");
  const auto manifest = synth::generate_dataset(500, 12, 7, dir.path(), {.workers = 1});
  const auto sets = data::station_sets(manifest.samples, manifest.splits);
  o.check(data::pairwise_disjoint(sets), "splits share a station");

  auto config = train::recipe(Architecture::wcamnet);
  config.epochs = 15;
  config.seed = 7;
  config.model.init_seed = 7;
  config.workers = 1;
  train::TrainOptions options;
  options.output_dir = dir / "run";
  options.on_epoch = [](const train::EpochStats& e) {
    std::cerr << "  epoch " << e.epoch << " val MAE " << fmt(e.val_mae) << " (" << fmt(e.seconds) << " s)\n";
  };
  const auto result = train::train(config, manifest, options);
  const auto report = eval::evaluate(*result.model, manifest.normalization, manifest, data::Split::test,
                                     result.report.config_hash);
  const double secs = seconds_since(t0);
  o.check(report.mae < 0.15, "test MAE " + fmt(report.mae) + " >= 0.15");
  o.check(secs < 1800, "took " + fmt(secs) + " s");
  o.detail << "test MAE " << fmt(report.mae) << ", RMSE " << fmt(report.rmse) << " on " << report.count
           << " held-out samples (best epoch " << result.report.best_epoch << "), " << fmt(secs) << " s";
}

// Full model against the no-HD and no-SE variants over seeds 1-3.
void ablation_direction(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  testing::TempDir dir("wcam_accept_ablation");
  const auto manifest = synth::generate_dataset(300, 12, 5, dir.path(), {.workers = 1});
  auto base = train::recipe(Architecture::wcamnet);
  base.model.grid_side = 16;
  base.epochs = 15;
  base.workers = 1;
  eval::ExperimentOptions options;
  options.seeds = {1, 2, 3};
  options.on_row = [](const eval::ComparisonRow& r) {
    std::cerr << "  " << r.name << ": MAE " << fmt(r.mae()) << "\n";
  };
  const auto table = eval::run_ablations(base, manifest, options);
  const auto& full = table.row("wcamnet");
  o.check(!full.failed(), "full model failed");
  for (const char* variant : {"wcamnet-no-hd", "wcamnet-no-se"}) {
    const auto& row = table.row(variant);
    if (!o.check(!row.failed(), std::string(variant) + " failed")) continue;
    const auto d = eval::compare_rows(full, row);
    o.check(d.mean_holds() || d.majority_holds(), std::string(variant) + " beats the full model");
    o.detail << variant << ": full " << fmt(d.reference_mae) << " vs " << fmt(d.variant_mae) << " (full not worse on "
             << d.seeds_held << "/" << d.seeds_compared << " seeds); ";
  }
  o.detail << fmt(seconds_since(t0)) << " s";
}

double loop_mae(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

double loop_mse(const std::vector<double>& p, const std::vector<double>& t) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

void metric_oracles(Outcome& o) {
  Rng rng(17);
  double worst = 0;
  int ordered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 500));
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform();
      t[i] = rng.uniform();
    }
    const double e_mae = std::abs(eval::mae(p, t) - loop_mae(p, t));
    const double e_rmse = std::abs(eval::rmse(p, t) - std::sqrt(loop_mse(p, t)));
    const double e_mse = std::abs(train::mse_loss(p, t) - loop_mse(p, t));
    worst = std::max({worst, e_mae, e_rmse, e_mse});
    if (eval::rmse(p, t) >= eval::mae(p, t)) ++ordered;
  }
  o.check(worst <= 1e-12, "oracle deviation " + fmt(worst));
  o.check(ordered == 100, "RMSE < MAE on " + std::to_string(100 - ordered) + " vectors");
  o.detail << "100 vectors, worst deviation " << fmt(worst) << ", RMSE >= MAE on " << ordered << "/100";
}

void scheduler(Outcome& o) {
  std::size_t steps_checked = 0;
  for (const auto& schedule : {train::ScheduleSpec::cosine(5), train::ScheduleSpec::step(10)}) {
    auto config = train::recipe(Architecture::wcamnet);
    config.model.grid_side = 2;
    config.schedule = schedule;
    config.base_lr = 0.01;
    auto m = model::build_model<float>(config.model);
    const std::size_t per_epoch = 2;
    train::Trainer trainer(config, *m, per_epoch);
    data::Batch batch{random_images(2, m->input_side(), 5), nn::Vector<float>::Constant(2, 0.5f), {}};
    for (int s = 0; s < 24; ++s) trainer.step(batch);
    for (std::size_t s = 0; s < trainer.lr_trace().size(); ++s) {
      const auto& point = trainer.lr_trace()[s];
      const double pos = schedule.per_iteration()
                             ? static_cast<double>(s / per_epoch) + static_cast<double>(s % per_epoch) / per_epoch
                             : static_cast<double>(s / per_epoch);
      o.check(point.epoch == pos && point.lr == train::lr_at(schedule, pos, config.base_lr),
              "lr trace differs at step " + std::to_string(s));
      ++steps_checked;
    }
  }
  const double base = 0.02;
  const double cos5 = train::lr_at(train::ScheduleSpec::cosine(5), 5.0, base);
  const double step10 = train::lr_at(train::ScheduleSpec::step(10), 10.0, base);
  o.check(cos5 == base, "cosine at epoch 5 is " + fmt(cos5));
  o.check(step10 == base / 10, "step at epoch 10 is " + fmt(step10));
  o.detail << steps_checked << " traced steps equal the closed form; cosine(5) = base_lr, step(10) = base_lr/10";
}

void data_pipeline(Outcome& o) {
  o.check(data::grip_to_friction(0.09) == 0.0, "grip 0.09 does not map to 0");
  o.check(data::grip_to_friction(0.82) == 1.0, "grip 0.82 does not map to 1");

  Rng rng(5);
  int leaks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<data::LabeledSample> samples;
    const auto stations = rng.integer(3, 40);
    for (int s = 0; s < stations; ++s)
      for (int k = rng.integer(1, 300); k > 0; --k) {
        data::LabeledSample x;
        x.camera_station_id = "st" + std::to_string(s);
        x.image_ref = x.camera_station_id + "/" + std::to_string(k);
        x.friction_factor = rng.uniform();
        samples.push_back(x);
      }
    const auto a = data::split_by_station(samples, data::kDefaultSplitFractions, static_cast<std::uint64_t>(trial));
    const auto sets = data::station_sets(samples, a);
    if (!data::pairwise_disjoint(sets) || sets[0].empty() || sets[1].empty() || sets[2].empty()) ++leaks;
  }
  o.check(leaks == 0, std::to_string(leaks) + " leaking split configurations");

  int flattened = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<data::LabeledSample> samples;
    const double skew = rng.uniform(0.5, 3.0);
    for (int b = 0; b < data::kDefaultBins; ++b) {
      const int count = 1 + static_cast<int>(rng.uniform(0.0, 200.0) * std::exp(-skew * b / 3.0));
      for (int k = 0; k < count; ++k) {
        data::LabeledSample x;
        x.camera_station_id = "st" + std::to_string(k % 5);
        x.image_ref = std::to_string(b) + "/" + std::to_string(k);
        x.friction_factor = (b + rng.uniform(0.05, 0.95)) / data::kDefaultBins;
        samples.push_back(x);
      }
    }
    const auto before = data::occupied_bin_ratio(data::friction_histogram(samples));
    const auto resampled =
        data::weighted_resample(samples, data::kDefaultBins, static_cast<long long>(samples.size() / 2), trial);
    const auto after = data::occupied_bin_ratio(data::friction_histogram(resampled));
    if (after < before) ++flattened;
  }
  o.check(flattened == 100, "resampling failed to flatten " + std::to_string(100 - flattened) + " skews");
  o.detail << "grip 0.09 -> 0, 0.82 -> 1; 1000 split configurations leak-free; max/min bin ratio reduced on "
           << flattened << "/100 skews";
}

void pca(Outcome& o) {
  double worst = 0;
  bool ordered = true, bounded = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const int n = 400, d = 16;
    Eigen::MatrixXd x(n, d), mix(d, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = rng.normal() * (1.0 + 3.0 / (1 + j));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) mix(i, j) = rng.normal();
    x = x * mix;
    const auto r = eval::pca3(x);
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c / (n - 1));
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd oracle = c * es.eigenvectors().col(d - 1 - k);
      worst = std::max(worst, std::min((r.scores.col(k) - oracle).cwiseAbs().maxCoeff(),
                                       (r.scores.col(k) + oracle).cwiseAbs().maxCoeff()));
    }
    ordered = ordered && r.explained_variance[0] >= r.explained_variance[1] &&
              r.explained_variance[1] >= r.explained_variance[2];
    const auto scaled = eval::scale_scores(r.scores);
    bounded = bounded && scaled.minCoeff() >= 0.0 && scaled.maxCoeff() <= 1.0;
  }
  // Tokens of a real image through the tiny backbone.
  model::Backbone<float> backbone(model::BackboneSpec::tiny(), model::kGridSide);
  synth::SceneSpec spec;
  spec.width = 160;
  spec.height = 90;
  spec.friction = 0.4;
  const auto v = eval::pca_token_visualization(synth::generate_scene(spec), backbone, model::kGridSide, {}, 1);
  const auto scaled = eval::scale_scores(v.pca.scores);
  bounded = bounded && scaled.minCoeff() >= 0.0 && scaled.maxCoeff() <= 1.0;
  ordered = ordered && v.pca.explained_variance[0] >= v.pca.explained_variance[1] &&
            v.pca.explained_variance[1] >= v.pca.explained_variance[2];

  o.check(worst <= 1e-6, "score deviation " + fmt(worst));
  o.check(ordered, "explained variance increases");
  o.check(bounded, "scaled output outside [0, 1]");
  o.detail << "worst score deviation from the eigendecomposition " << fmt(worst)
           << " (up to sign); variance non-increasing; scaled scores in [0, 1] incl. a 43x43 token grid";
}

const std::filesystem::path kIngestFixtures = std::filesystem::path(WCAM_FIXTURE_DIR) / "ingest";

ingest::ClientConfig fast_client(const std::string& url) {
  ingest::ClientConfig c;
  c.base_url = url;
  c.backoff = std::chrono::milliseconds{10};
  c.timeout = std::chrono::seconds{2};
  return c;
}

ingest::TimePoint fixture_time(int hour, int minute) {
  return ingest::TimePoint{make_timestamp(2023, 3, 1, hour, minute)};
}

void ingestion_replay(Outcome& o) {
  std::map<std::string, int> calls;
  std::mutex mutex;
  testing::StubServer server([&](httplib::Server& s) {
    s.Get("/cameras/:id/image", [](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.path_params.at("id");
      for (const char* ext : {".jpg", ".png"}) {
        const auto p = kIngestFixtures / "cameras" / (id + ext);
        if (std::filesystem::exists(p)) {
          res.set_content(slurp(p), ext == std::string(".jpg") ? "image/jpeg" : "image/png");
          return;
        }
      }
      res.status = 404;
    });
    s.Get("/stations/:id/sensors", [&](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.path_params.at("id");
      int n;
      {
        std::lock_guard lock(mutex);
        n = calls[id]++;
      }
      const auto p = kIngestFixtures / "stations" / (id + "." + std::to_string(n) + ".json");
      if (!std::filesystem::exists(p)) {
        res.status = 404;
        return;
      }
      res.set_content(slurp(p), "application/json");
    });
  });
  testing::TempDir dir("wcam_accept_ingest");
  ingest::ManualClock clock(fixture_time(6, 0));
  ingest::RoadDataClient client(fast_client(server.base_url()), clock);
  ingest::ArchiveWriter writer(dir.path());
  const auto pairs = ingest::read_station_pairs(kIngestFixtures / "pairs.json");
  const auto summary =
      ingest::run_collection(pairs, std::chrono::minutes{40}, std::chrono::minutes{20}, client, writer);
  o.check(slurp(dir / "2023-03-01/records.jsonl") == slurp(kIngestFixtures / "expected/2023-03-01/records.jsonl"),
          "records.jsonl differs from the golden file");
  int images_matching = 0;
  for (const char* tick : {"20230301T060000Z", "20230301T062000Z"})
    for (const auto& [camera, ext] : std::vector<std::pair<std::string, std::string>>{
             {"c1011", ".jpg"}, {"c1012", ".png"}, {"c1021", ".jpg"}})
      if (slurp(dir / ("2023-03-01/images/" + camera) / (tick + ext)) ==
          slurp(kIngestFixtures / "cameras" / (camera + ext)))
        ++images_matching;
  o.check(images_matching == 6, std::to_string(images_matching) + "/6 archived images match");
  o.check(summary.image_records == 6 && summary.reading_records == 6 && summary.skips == 0,
          "unexpected record counts");

  // Retry policy: 5xx and 429 retried up to three attempts, other 4xx not retried.
  std::atomic<int> hits_503{0}, hits_flaky{0}, hits_404{0};
  const auto jpeg = slurp(kIngestFixtures / "cameras/c1011.jpg");
  testing::StubServer policy([&](httplib::Server& s) {
    s.Get("/cameras/down/image", [&](const httplib::Request&, httplib::Response& res) {
      ++hits_503;
      res.status = 503;
    });
    s.Get("/cameras/flaky/image", [&](const httplib::Request&, httplib::Response& res) {
      const int n = ++hits_flaky;
      if (n < 3) {
        res.status = n == 1 ? 429 : 502;
        return;
      }
      res.set_content(jpeg, "image/jpeg");
    });
    s.Get("/cameras/gone/image", [&](const httplib::Request&, httplib::Response& res) {
      ++hits_404;
      res.status = 404;
    });
  });
  ingest::ManualClock policy_clock(fixture_time(7, 0));
  ingest::RoadDataClient policy_client(fast_client(policy.base_url()), policy_clock);
  const ingest::StationPair pair{"cs-1", "ws-1", {"down", "flaky", "gone"}, 1, 0.2};
  const auto at7 = make_timestamp(2023, 3, 1, 7);
  const auto down = ingest::poll_camera(policy_client, pair, "down", at7);
  const auto flaky = ingest::poll_camera(policy_client, pair, "flaky", at7);
  const auto gone = ingest::poll_camera(policy_client, pair, "gone", at7);
  o.check(down.kind == ingest::RecordKind::skip && down.attempts == 3 && hits_503 == 3,
          "503 was not retried three times then skipped");
  o.check(flaky.kind == ingest::RecordKind::image && flaky.attempts == 3 && flaky.payload == jpeg,
          "429/502 then 200 did not recover");
  o.check(gone.kind == ingest::RecordKind::skip && gone.attempts == 1 && hits_404 == 1, "404 was retried");

  std::string dead_url;
  {
    testing::StubServer closed([](httplib::Server&) {});
    dead_url = closed.base_url();
  }
  ingest::RoadDataClient dead_client(fast_client(dead_url), policy_clock);
  const auto dead = ingest::poll_camera(dead_client, pair, "down", at7);
  o.check(dead.kind == ingest::RecordKind::skip && dead.attempts == 3, "transport error was not retried");

  o.detail << "records.jsonl and " << images_matching << "/6 images byte-identical to the golden archive; "
           << "503 x3 -> skip, 429/502 -> recovered on attempt 3, 404 -> skip after 1, refused -> skip after 3";
}

}  // namespace
}  // namespace wcam

int main(int argc, char** argv) {
  using namespace wcam;
  const std::vector<Criterion> criteria{
      {1, "forward shapes", shapes},
      {2, "frozen backbone", frozen_backbone},
      {3, "gradient check", gradient_check},
      {4, "overfit smoke", overfit},
      {5, "synthetic end-to-end", end_to_end},
      {6, "ablation directionality", ablation_direction},
      {7, "metric oracles", metric_oracles},
      {8, "scheduler conformance", scheduler},
      {9, "data pipeline", data_pipeline},
      {10, "PCA visualization", pca},
      {11, "ingestion replay", ingestion_replay},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": "
              << o.detail.str() << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
