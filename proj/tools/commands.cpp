#include "commands.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "cli_config.hpp"
#include "wcam/eval/evaluate.hpp"
#include "wcam/eval/experiments.hpp"
#include "wcam/eval/histogram.hpp"
#include "wcam/eval/pca.hpp"
#include "wcam/eval/render.hpp"
#include "wcam/ingest/collector.hpp"
#include "wcam/synth/scene.hpp"
#include "wcam/train/grid.hpp"
#include "wcam/util/hash.hpp"
#include "wcam/util/time.hpp"

namespace wcam::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

std::string required_string(const nlohmann::json& doc, const std::string& section, const std::string& key,
                            const std::string& flag) {
  const auto v = doc.at(section).value(key, std::string{});
  if (v.empty()) throw UsageError("missing " + flag + " (or " + section + "." + key + " in the config)");
  return v;
}

data::DatasetManifest load_manifest(const nlohmann::json& doc) {
  return data::read_manifest(required_string(doc, "data", "manifest", "--manifest"));
}

std::string split_sizes(const data::DatasetManifest& m) {
  std::string s;
  for (const auto split : data::kSplits)
    s += (s.empty() ? "" : ", ") + data::to_string(split) + " " + std::to_string(m.indices(split).size());
  return s;
}

void write_training_curves(const train::RunReport& report, const fs::path& dir) {
  if (report.epochs.empty()) return;
  eval::LineSeries loss{"train loss", {}, {}}, mae{"val MAE", {}, {}}, rmse{"val RMSE", {}, {}};
  for (const auto& e : report.epochs) {
    for (auto* s : {&loss, &mae, &rmse}) s->x.push_back(e.epoch);
    loss.y.push_back(e.train_loss);
    mae.y.push_back(e.val_mae);
    rmse.y.push_back(e.val_rmse);
  }
  data::write_png(dir / "training_curve.png",
                  eval::line_chart("Training " + report.model, "epoch", {loss, mae, rmse}));
  if (report.lr_trace.empty()) return;
  eval::LineSeries lr{"learning rate", {}, {}};
  for (const auto& p : report.lr_trace) {
    lr.x.push_back(p.epoch);
    lr.y.push_back(p.lr);
  }
  data::write_png(dir / "lr_schedule.png", eval::line_chart("Learning rate", "epoch", {lr}));
}

void log_epoch(std::ostream& log, const train::EpochStats& e) {
  log << "epoch " << e.epoch << ": train loss " << fmt(e.train_loss, 5) << ", val MAE " << fmt(e.val_mae)
      << ", val RMSE " << fmt(e.val_rmse) << " (" << fmt(e.seconds, 1) << " s)\n";
}

std::atomic<std::stop_source*> g_stop{nullptr};

extern "C" void on_interrupt(int) {
  if (auto* s = g_stop.load()) s->request_stop();
}

}  // namespace

void write_resolved_config(const Context& ctx) {
  fs::create_directories(ctx.output_dir);
  nlohmann::json j = ctx.config;
  j["command"] = ctx.command;
  j["output_dir"] = ctx.output_dir.string();
  write_json(ctx.output_dir / "resolved_config.json", j);
}

void cmd_ingest(const Context& ctx) {
  auto& out = *ctx.out;
  ingest::IngestConfig config;
  try {
    config = ingest::ingest_config_from_json(ctx.config.at("ingest"));
  } catch (const Error& e) {
    throw UsageError(std::string("ingest config: ") + e.what());
  }
  if (config.archive_dir.is_absolute()) throw UsageError("ingest.archive_dir must be relative to the output directory");
  config.archive_dir = ctx.output_dir / config.archive_dir;

  if (ctx.dry_run) {
    const auto start = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    std::set<std::string> stations;
    std::vector<std::string> paths;
    for (const auto& p : config.pairs) {
      for (const auto& c : p.camera_ids) paths.push_back("/cameras/" + c + "/image");
      if (stations.insert(p.weather_station_id).second) paths.push_back("/stations/" + p.weather_station_id + "/sensors");
    }
    int ticks = 0;
    for (auto t = std::chrono::seconds{0}; t < config.duration; t += config.cadence) ++ticks;
    out << "dry run: " << ticks << " ticks every " << config.cadence.count() << " s over " << config.duration.count()
        << " s, " << paths.size() << " requests per tick against " << config.client.base_url << "\n";
    for (int k = 0; k < ticks; ++k) {
      out << "tick " << k << " at " << format_iso(start + k * config.cadence) << ":";
      for (const auto& p : paths) out << " " << p;
      out << "\n";
    }
    out << "archive would be written to " << config.archive_dir.string() << "\n";
    return;
  }

  write_resolved_config(ctx);
  std::stop_source stop;
  g_stop.store(&stop);
  const auto previous = std::signal(SIGINT, on_interrupt);
  ingest::SystemClock clock;
  ingest::CollectionSummary summary;
  try {
    summary = ingest::run_collection(config, clock, stop.get_token());
  } catch (...) {
    std::signal(SIGINT, previous);
    g_stop.store(nullptr);
    throw;
  }
  std::signal(SIGINT, previous);
  g_stop.store(nullptr);

  write_json(ctx.output_dir / "ingest_summary.json", summary.to_json());
  out << "ticks " << summary.ticks << ", images " << summary.image_records << ", readings " << summary.reading_records
      << " (" << summary.partial_readings << " partial, " << summary.out_of_range << " out of range), skips "
      << summary.skips << ", " << summary.bytes << " bytes" << (summary.cancelled ? ", cancelled" : "") << "\n";
  if (summary.image_records + summary.reading_records == 0)
    throw RuntimeFailure("no image or reading records were collected (" + std::to_string(summary.skips) +
                         " fetches skipped); see " + (config.archive_dir / "*" / "records.jsonl").string());
}

namespace {

synth::DatasetOptions synthetic_options(const std::map<std::string, std::string>& spec, int& n, int& stations,
                                        int workers) {
  synth::DatasetOptions o;
  o.workers = workers;
  stations = 12;
  n = 0;
  auto as_int = [](const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const int x = std::stoi(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("--synthetic " + key + " must be an integer, got '" + v + "'");
  };
  for (const auto& [k, v] : spec) {
    if (k == "n") n = as_int(k, v);
    else if (k == "stations") stations = as_int(k, v);
    else if (k == "width") o.width = as_int(k, v);
    else if (k == "height") o.height = as_int(k, v);
    else if (k == "skewed") o.skewed = as_int(k, v) != 0;
    else if (k == "mask") o.mask_road = as_int(k, v) != 0;
    else if (k == "resample") o.resample_target = as_int(k, v);
    else throw UsageError("unknown --synthetic key '" + k + "' (n, stations, width, height, skewed, mask, resample)");
  }
  if (n < 3) throw UsageError("--synthetic needs n >= 3");
  if (stations < 3) throw UsageError("--synthetic needs stations >= 3");
  return o;
}

void print_manifest_stats(std::ostream& out, const data::DatasetManifest& m, const fs::path& path) {
  out << "manifest " << path.string() << ": " << m.samples.size() << " samples, " << m.splits.size()
      << " stations; " << split_sizes(m) << "\n";
  if (m.info.contains("histogram_after")) out << "friction histogram: " << m.info.at("histogram_after").dump() << "\n";
}

}  // namespace

void cmd_build_dataset(const Context& ctx) {
  auto& out = *ctx.out;
  const auto& ds = ctx.config.at("dataset");
  const auto seed = ctx.config.at("seed").get<std::uint64_t>();
  const int workers = ctx.config.at("workers").get<int>();
  const auto synthetic = ds.value("synthetic", std::string{});
  const auto archive = ds.value("archive", std::string{});
  if (synthetic.empty() == archive.empty()) throw UsageError("build-dataset needs exactly one of --synthetic or --archive");

  if (!synthetic.empty()) {
    int n = 0, stations = 0;
    const auto options = synthetic_options(parse_assignments(synthetic, "n"), n, stations, workers);
    if (ctx.dry_run) {
      const auto plan = synth::plan_dataset(n, stations, seed, options);
      out << "dry run: " << plan.samples.size() << " synthetic scenes over " << stations << " stations at "
          << options.width << "x" << options.height << ", histogram "
          << nlohmann::json(data::friction_histogram(plan.samples)).dump() << "\n";
      return;
    }
    write_resolved_config(ctx);
    const auto m = synth::generate_dataset(n, stations, seed, ctx.output_dir, options);
    print_manifest_stats(out, m, ctx.output_dir / "manifest.jsonl");
    return;
  }

  auto pairs_path = ds.value("pairs", std::string{});
  if (pairs_path.empty()) pairs_path = ctx.config.at("ingest").value("pairs_file", std::string{});
  if (pairs_path.empty()) throw UsageError("building from an archive needs --pairs");
  const auto pairs = ingest::read_station_pairs(pairs_path);
  const std::chrono::seconds tolerance{ds.value("tolerance_s", data::kAlignmentTolerance.count())};
  data::BuildOptions bo;
  bo.seed = seed;
  bo.bins = ds.value("bins", data::kDefaultBins);
  bo.resample_target = ds.value("resample_target", 0LL);
  bo.workers = workers;

  auto labelled = ingest::label_archive(archive, pairs, tolerance);
  out << "labelled " << labelled.samples.size() << " images (" << labelled.dropped << " without a reading, "
      << labelled.clamped_readings << " readings clamped)\n";
  if (labelled.samples.empty()) throw RuntimeFailure("archive " + archive + " produced no labelled samples");
  if (ctx.dry_run) return;

  write_resolved_config(ctx);
  const auto root = fs::absolute(ctx.output_dir);
  for (auto& s : labelled.samples)
    s.image_ref = fs::relative(fs::absolute(fs::path(archive) / s.image_ref), root).generic_string();
  const auto m = data::build_manifest(labelled.samples, root, bo);
  data::write_manifest(ctx.output_dir / "manifest.jsonl", m);
  print_manifest_stats(out, m, ctx.output_dir / "manifest.jsonl");
}

void cmd_train(const Context& ctx) {
  auto& out = *ctx.out;
  const auto config = train_config(ctx.config);
  const auto manifest = load_manifest(ctx.config);
  if (ctx.dry_run) {
    out << "dry run: would train " << model::to_string(config.model.architecture) << " (config hash "
        << train::config_hash(config) << ") on " << split_sizes(manifest) << "\n"
        << nlohmann::json(config).dump(2) << "\n";
    return;
  }
  write_resolved_config(ctx);
  train::TrainOptions options;
  options.output_dir = ctx.output_dir;
  options.on_epoch = [&](const train::EpochStats& e) { log_epoch(*ctx.log, e); };
  auto result = train::train(config, manifest, options);
  const auto& r = result.report;
  write_training_curves(r, ctx.output_dir);
  out << "best epoch " << r.best_epoch << ": val MAE " << fmt(r.best_val_mae) << ", val RMSE "
      << fmt(r.best_val_rmse) << "; checkpoint " << r.checkpoint << "\n";
  if (!manifest.indices(data::Split::test).empty()) {
    eval::EvaluateOptions eo;
    eo.workers = config.workers;
    eo.batch_size = config.batch_size;
    const auto m = eval::evaluate(*result.model, manifest.normalization, manifest, data::Split::test, r.config_hash, eo);
    write_json(ctx.output_dir / "metrics.json", m);
    out << "test MAE " << fmt(m.mae) << ", RMSE " << fmt(m.rmse) << " over " << m.count << " samples\n";
  }
}

void cmd_gridsearch(const Context& ctx) {
  auto& out = *ctx.out;
  const auto base = train_config(ctx.config);
  const auto manifest = load_manifest(ctx.config);
  train::GridSpec grid;
  try {
    const auto& g = ctx.config.at("grid");
    grid.base_lrs = g.at("base_lrs").get<std::vector<double>>();
    grid.weight_decays = g.at("weight_decays").get<std::vector<double>>();
    grid.epochs = g.value("epochs", 0);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad grid config: ") + e.what());
  }
  for (double lr : grid.base_lrs)
    if (!(lr > 0)) throw UsageError("grid learning rates must be positive");
  for (double wd : grid.weight_decays)
    if (!(wd >= 0)) throw UsageError("grid weight decays must be non-negative");
  if (grid.base_lrs.empty() || grid.weight_decays.empty()) throw UsageError("grid lists must not be empty");
  if (ctx.dry_run) {
    out << "dry run: " << grid.base_lrs.size() * grid.weight_decays.size() << " cells of "
        << model::to_string(base.model.architecture) << " on " << split_sizes(manifest) << "\n";
    return;
  }
  write_resolved_config(ctx);
  train::TrainOptions options;
  options.output_dir = ctx.output_dir;
  options.on_epoch = [&](const train::EpochStats& e) { log_epoch(*ctx.log, e); };
  train::GridResult result;
  try {
    result = train::grid_search(grid, base, manifest, options);
  } catch (const train::GridSearchFailed& e) {
    write_json(ctx.output_dir / "grid_search.json", {{"cells", nlohmann::json(train::GridResult{base, 0, e.cells()})["cells"]}});
    throw;
  }
  for (const auto& c : result.cells) {
    out << "lr " << c.base_lr << " wd " << c.weight_decay << ": ";
    if (c.ok()) {
      out << "val MAE " << fmt(c.report->best_val_mae);
    } else {
      out << "failed (" << c.error << ")";
    }
    out << "\n";
  }
  out << "best: lr " << result.best.base_lr << ", weight decay " << result.best.weight_decay << "\n";
}

void cmd_eval(const Context& ctx) {
  auto& out = *ctx.out;
  const auto checkpoint = required_string(ctx.config, "eval", "checkpoint", "--checkpoint");
  const auto manifest = load_manifest(ctx.config);
  data::Split split;
  try {
    split = data::parse_split(ctx.config.at("data").value("split", std::string{"test"}));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  // A model given explicitly must match the checkpoint.
  const auto defaults = default_config();
  const bool model_given =
      ctx.config.at("model") != defaults.at("model") || ctx.config.at("tiny_backbone").get<bool>();
  std::optional<model::ModelConfig> expected;
  if (model_given) expected = model_config(ctx.config);
  if (ctx.dry_run) {
    out << "dry run: would evaluate " << checkpoint << " on " << data::to_string(split) << " ("
        << manifest.indices(split).size() << " samples)\n";
    return;
  }
  write_resolved_config(ctx);
  auto loaded = model::load_checkpoint<float>(checkpoint);
  if (expected) {
    nlohmann::json a = *expected, b = loaded.model->config();
    a.erase("init_seed");
    b.erase("init_seed");
    if (a != b) throw CheckpointError("checkpoint/config mismatch: checkpoint was trained with " + b.dump());
  }
  const auto hash = loaded.metadata.contains("config_hash")
                        ? loaded.metadata.at("config_hash").get<std::string>()
                        : hex64(fnv1a(nlohmann::json(loaded.model->config()).dump()));
  eval::EvaluateOptions eo;
  eo.workers = ctx.config.at("workers").get<int>();
  const auto report = eval::evaluate(*loaded.model, loaded.normalization, manifest, split, hash, eo);
  write_json(ctx.output_dir / "metrics.json", report);
  out << report.model << " on " << report.split << ": MAE " << fmt(report.mae) << ", RMSE " << fmt(report.rmse)
      << " over " << report.count << " samples (config " << report.config_hash << ")\n";
}

namespace {

eval::ExperimentOptions experiment_options(const Context& ctx, int epochs) {
  eval::ExperimentOptions o;
  o.seeds = {ctx.config.at("seed").get<std::uint64_t>()};
  o.epochs = epochs;
  o.output_dir = ctx.output_dir;
  o.workers = ctx.config.at("workers").get<int>();
  o.on_row = [&ctx](const eval::ComparisonRow& r) {
    auto& log = *ctx.log;
    log << r.name << ": ";
    if (r.failed()) {
      log << "failed";
    } else {
      log << "MAE " << fmt(r.mae()) << ", RMSE " << fmt(r.rmse());
    }
    for (const auto& e : r.errors) log << " [" << e << "]";
    log << "\n";
  };
  return o;
}

// Applies the train section of the config on top of an entry's recipe.
void apply_train_overrides(eval::ExperimentEntry& entry, const nlohmann::json& doc) {
  try {
    nlohmann::json j = entry.config;
    j.merge_patch(doc.at("train"));
    j["model"] = entry.config.model;
    entry.config = j.get<train::TrainConfig>();
    entry.config.workers = doc.at("workers").get<int>();
    entry.config.validate();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad train config: ") + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void finish_table(const Context& ctx, const eval::ComparisonTable& t, const std::string& stem) {
  eval::write_table(t, ctx.output_dir, stem);
  *ctx.out << t.markdown();
  bool any = false;
  for (const auto& r : t.rows) any = any || !r.failed();
  if (!any) throw RuntimeFailure("every row of the " + stem + " table failed");
}

}  // namespace

void cmd_benchmark(const Context& ctx) {
  auto doc = ctx.config;
  doc["model"]["architecture"] = "wcamnet";
  const auto base = model_config(doc);
  auto entries = eval::benchmark_entries(base);
  const auto wanted = ctx.config.at("benchmark").value("models", std::vector<std::string>{});
  if (!wanted.empty()) {
    std::vector<eval::ExperimentEntry> picked;
    for (const auto& name : wanted) {
      const auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.name == name; });
      if (it == entries.end()) {
        try {
          model::parse_architecture(name);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }
      picked.push_back(*it);
    }
    entries = picked;
  }
  for (auto& e : entries) apply_train_overrides(e, ctx.config);
  const auto manifest = load_manifest(ctx.config);
  const int epochs = ctx.config.at("benchmark").value("epochs", 0);
  if (ctx.dry_run) {
    *ctx.out << "dry run: benchmark rows";
    for (const auto& e : entries) *ctx.out << " " << e.name << "(" << (epochs > 0 ? epochs : e.config.epochs) << " epochs)";
    *ctx.out << " on " << split_sizes(manifest) << "\n";
    return;
  }
  write_resolved_config(ctx);
  const auto t = eval::run_benchmark(entries, manifest, experiment_options(ctx, epochs));
  finish_table(ctx, t, "benchmark");
}

void cmd_ablate(const Context& ctx) {
  auto doc = ctx.config;
  if (doc.at("model").at("architecture") != "wcamnet") throw UsageError("ablate runs on wcamnet only");
  const auto base = train_config(doc);
  const auto& ab = ctx.config.at("ablate");
  std::vector<std::uint64_t> seeds;
  try {
    seeds = ab.at("seeds").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("ablate.seeds: ") + e.what());
  }
  if (seeds.empty()) throw UsageError("ablate needs at least one seed");
  const auto manifest = load_manifest(ctx.config);
  const int epochs = ab.value("epochs", 0);
  const auto large = ab.value("large_weights_path", std::string{});
  if (ctx.dry_run) {
    *ctx.out << "dry run: 4 ablation rows x " << seeds.size() << " seeds, " << (epochs > 0 ? epochs : base.epochs)
             << " epochs each, on " << split_sizes(manifest) << "\n";
    return;
  }
  write_resolved_config(ctx);
  auto options = experiment_options(ctx, epochs);
  options.seeds = seeds;
  const auto t = eval::run_ablations(base, manifest, options, large);
  nlohmann::json direction = nlohmann::json::object();
  const auto& full = t.row("wcamnet");
  for (const char* variant : {"wcamnet-no-hd", "wcamnet-no-se", "wcamnet-large-backbone"}) {
    const auto& row = t.row(variant);
    if (full.failed() || row.failed()) continue;
    try {
      const auto d = eval::compare_rows(full, row);
      direction[variant] = {{"full_mae", d.reference_mae},
                            {"variant_mae", d.variant_mae},
                            {"seeds_full_not_worse", d.seeds_held},
                            {"seeds_compared", d.seeds_compared},
                            {"mean_holds", d.mean_holds()},
                            {"majority_holds", d.majority_holds()}};
    } catch (const Error&) {
    }
  }
  write_json(ctx.output_dir / "ablation_direction.json", direction);
  finish_table(ctx, t, "ablations");
}

void cmd_viz(const Context& ctx) {
  const auto& v = ctx.config.at("viz");
  const auto image_path = required_string(ctx.config, "viz", "image", "--image");
  const int upscale = v.value("upscale", 8);
  if (upscale < 1 || upscale > 64) throw UsageError("--upscale must be in [1, 64]");
  const auto checkpoint = v.value("checkpoint", std::string{});
  std::optional<model::ModelConfig> config;
  if (checkpoint.empty()) config = model_config(ctx.config);
  if (ctx.dry_run) {
    *ctx.out << "dry run: would render PCA tokens of " << image_path << "\n";
    return;
  }
  write_resolved_config(ctx);
  const auto image = data::read_image(image_path);

  data::Normalization norm;
  if (const auto m = ctx.config.at("data").value("manifest", std::string{}); !m.empty())
    norm = data::read_manifest(m).normalization;
  std::unique_ptr<model::RegressionModel<float>> owner;
  std::unique_ptr<model::Backbone<float>> own_backbone;
  model::Backbone<float>* backbone = nullptr;
  if (!checkpoint.empty()) {
    auto loaded = model::load_checkpoint<float>(checkpoint);
    norm = loaded.normalization;
    owner = std::move(loaded.model);
    config = owner->config();
    if (auto* net = dynamic_cast<model::WCamNet<float>*>(owner.get())) backbone = &net->backbone();
  }
  if (!backbone) {
    own_backbone = std::make_unique<model::Backbone<float>>(config->backbone, config->grid_side);
    backbone = own_backbone.get();
  }
  const auto vis = eval::pca_token_visualization(image, *backbone, config->grid_side, norm, upscale);
  if (!vis.pca.warning.empty()) *ctx.log << "warning: " << vis.pca.warning << "\n";
  const auto stem = "pca_" + fs::path(image_path).stem().string();
  data::write_png(ctx.output_dir / (stem + ".png"), vis.image);
  const auto& ev = vis.pca.explained_variance;
  write_json(ctx.output_dir / (stem + ".json"), {{"image", image_path},
                                                {"grid_side", config->grid_side},
                                                {"explained_variance", {ev[0], ev[1], ev[2]}},
                                                {"rank", vis.pca.rank},
                                                {"warning", vis.pca.warning}});
  *ctx.out << "wrote " << (ctx.output_dir / (stem + ".png")).string() << " (" << vis.image.width << "x"
           << vis.image.height << ", explained variance " << ev[0] << ", " << ev[1] << ", " << ev[2] << ")\n";
}

void cmd_plot(const Context& ctx) {
  const auto& p = ctx.config.at("plot");
  auto manifest_path = p.value("manifest", std::string{});
  if (manifest_path.empty()) manifest_path = ctx.config.at("data").value("manifest", std::string{});
  const auto report_path = p.value("run_report", std::string{});
  if (manifest_path.empty() && report_path.empty()) throw UsageError("plot needs --manifest and/or --run-report");
  if (ctx.dry_run) {
    *ctx.out << "dry run: would plot" << (manifest_path.empty() ? "" : " friction histograms")
             << (report_path.empty() ? "" : " training curves") << "\n";
    return;
  }
  write_resolved_config(ctx);
  if (!manifest_path.empty()) {
    const auto m = data::read_manifest(manifest_path);
    eval::HistogramOptions o;
    o.bins = ctx.config.at("dataset").value("bins", data::kDefaultBins);
    o.resample_target = ctx.config.at("dataset").value("resample_target", 0LL);
    o.seed = ctx.config.at("seed").get<std::uint64_t>();
    const auto h = eval::plot_histograms(m, ctx.output_dir, o);
    *ctx.out << "friction histogram before " << nlohmann::json(h.before).dump() << ", after "
             << nlohmann::json(h.after).dump() << "\n";
  }
  if (!report_path.empty()) {
    std::ifstream in(report_path);
    if (!in) throw IoError("cannot open run report " + report_path);
    train::RunReport report;
    try {
      report = nlohmann::json::parse(in).get<train::RunReport>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("run report " + report_path + " is malformed: " + e.what());
    }
    write_training_curves(report, ctx.output_dir);
    *ctx.out << "training curves for " << report.model << " (" << report.epochs.size() << " epochs)\n";
  }
}

}  // namespace wcam::cli
