#include "wcam/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wcam/eval/metrics.hpp"
#include "wcam/eval/predict.hpp"
#include "wcam/train/loss.hpp"
#include "wcam/util/hash.hpp"

namespace wcam::train {

void TrainConfig::validate() const {
  model.validate();
  schedule.validate();
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(base_lr > 0.0)) throw ConfigError("base_lr must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"model", c.model},           {"epochs", c.epochs},     {"batch_size", c.batch_size},
       {"base_lr", c.base_lr},       {"weight_decay", c.weight_decay}, {"momentum", c.momentum},
       {"schedule", c.schedule},     {"seed", c.seed},         {"augment", c.augment},
       {"workers", c.workers}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  // A model entry brings its recipe; explicit keys override it.
  if (j.contains("model")) c = recipe(j.at("model").get<model::ModelConfig>());
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.base_lr = j.value("base_lr", c.base_lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.momentum = j.value("momentum", c.momentum);
  if (j.contains("schedule")) c.schedule = j.at("schedule").get<ScheduleSpec>();
  c.seed = j.value("seed", c.seed);
  c.augment = j.value("augment", c.augment);
  c.workers = j.value("workers", c.workers);
}

std::string config_hash(const TrainConfig& config) {
  nlohmann::json j = config;
  j.erase("workers");
  return hex64(fnv1a(j.dump()));
}

TrainConfig recipe(const model::ModelConfig& m) {
  TrainConfig c;
  c.model = m;
  switch (m.architecture) {
    case model::Architecture::wcamnet:
      c.epochs = 15;
      c.schedule = ScheduleSpec::cosine(5);
      break;
    case model::Architecture::backbone_linear_head:
      c.epochs = 6;
      c.schedule = ScheduleSpec::step(2);
      break;
    case model::Architecture::resnet50_style:
    case model::Architecture::resnet152_style:
    case model::Architecture::vgg19_style:
    case model::Architecture::vit_full_finetune:
      c.epochs = 30;
      c.schedule = ScheduleSpec::step(10);
      break;
  }
  return c;
}

TrainConfig recipe(model::Architecture a) { return recipe(model::desk_config(a)); }

void to_json(nlohmann::json& j, const RunReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_mae", e.val_mae},
                      {"val_rmse", e.val_rmse},
                      {"seconds", e.seconds}});
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& p : r.lr_trace) trace.push_back({p.epoch, p.lr});
  j = {{"model", r.model},
       {"config_hash", r.config_hash},
       {"epochs", epochs},
       {"lr_trace", trace},
       {"wall_seconds", r.wall_seconds},
       {"best_epoch", r.best_epoch},
       {"best_val_mae", r.best_val_mae},
       {"best_val_rmse", r.best_val_rmse},
       {"checkpoint", r.checkpoint}};
}

void from_json(const nlohmann::json& j, RunReport& r) {
  r = RunReport{};
  r.model = j.at("model").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& e : j.at("epochs"))
    r.epochs.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(), e.at("val_mae").get<double>(),
                        e.at("val_rmse").get<double>(), e.value("seconds", 0.0)});
  for (const auto& p : j.at("lr_trace")) r.lr_trace.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.best_epoch = j.at("best_epoch").get<int>();
  r.best_val_mae = j.at("best_val_mae").get<double>();
  r.best_val_rmse = j.value("best_val_rmse", 0.0);
  r.checkpoint = j.value("checkpoint", std::string{});
}

Trainer::Trainer(const TrainConfig& config, Model& model, std::size_t steps_per_epoch)
    : config_(config),
      model_(model),
      steps_per_epoch_(steps_per_epoch),
      optimizer_(model.trainable_parameters(), config.momentum, config.weight_decay) {
  if (steps_per_epoch_ == 0) throw ArgumentError("steps_per_epoch must be positive");
}

double Trainer::position() const {
  const auto epoch = static_cast<double>(steps_ / steps_per_epoch_);
  if (!config_.schedule.per_iteration()) return epoch;
  return epoch + static_cast<double>(steps_ % steps_per_epoch_) / static_cast<double>(steps_per_epoch_);
}

double Trainer::step(const data::Batch& batch) {
  const double pos = position();
  const double lr = lr_at(config_.schedule, pos, config_.base_lr);
  model_.zero_grad();
  const auto pred = model_.forward(batch.images, nn::Mode::train);
  const double loss = mse_loss(pred, batch.targets);
  if (!std::isfinite(loss)) {
    char msg[256];
    std::snprintf(msg, sizeof msg,
                  "non-finite loss at step %zu (lr %.3g): predictions min %.4g max %.4g, targets mean %.4g over %ld",
                  steps_, lr, static_cast<double>(pred.minCoeff()), static_cast<double>(pred.maxCoeff()),
                  static_cast<double>(batch.targets.mean()), static_cast<long>(batch.targets.size()));
    throw TrainingDiverged(msg);
  }
  model_.backward(mse_loss_grad(pred, batch.targets));
  optimizer_.step(lr);
  trace_.push_back({pos, lr});
  ++steps_;
  return loss;
}

namespace {

std::vector<nn::Vector<float>> snapshot(Model& m) {
  std::vector<nn::Vector<float>> out;
  for (const auto* p : m.parameters()) out.push_back(p->value);
  return out;
}

void restore(Model& m, const std::vector<nn::Vector<float>>& values) {
  const auto params = m.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainResult train(const TrainConfig& config, const data::DatasetManifest& manifest, const TrainOptions& options) {
  config.validate();
  if (manifest.indices(data::Split::val).empty()) throw ConfigError("validation split is empty");
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result;
  result.model = model::build_model<float>(config.model);
  auto& model = *result.model;

  data::LoaderOptions lo;
  lo.batch_size = config.batch_size;
  lo.shuffle = true;
  lo.augment = config.augment;
  lo.workers = config.workers;
  lo.side = static_cast<int>(model.input_side());
  lo.augment_params.pad = static_cast<int>(std::lround(64.0 * lo.side / data::kModelSide));
  lo.seed = derive_seed(config.seed, {0x7a});
  const data::DataLoader loader(manifest, data::Split::train, lo, options.reader);

  Trainer trainer(config, model, loader.batches());
  auto& report = result.report;
  report.model = model::to_string(config.model.architecture);
  report.config_hash = config_hash(config);

  std::vector<nn::Vector<float>> best;
  if (!options.output_dir.empty()) std::filesystem::create_directories(options.output_dir);
  const auto ckpt = options.output_dir.empty() ? std::filesystem::path{} : options.output_dir / "best.ckpt";

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto e0 = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < loader.batches(); ++b) {
      const auto batch = loader.batch(epoch, b);
      loss_sum += trainer.step(batch) * static_cast<double>(batch.targets.size());
      seen += static_cast<std::size_t>(batch.targets.size());
    }
    model.release_cache();

    const auto val = eval::predict(model, manifest, data::Split::val, config.batch_size, options.reader, config.workers);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(seen);
    stats.val_mae = eval::mae(val.preds, val.targets);
    stats.val_rmse = eval::rmse(val.preds, val.targets);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - e0).count();
    report.epochs.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);

    if (report.best_epoch < 0 || stats.val_mae < report.best_val_mae) {
      report.best_epoch = epoch;
      report.best_val_mae = stats.val_mae;
      report.best_val_rmse = stats.val_rmse;
      best = snapshot(model);
      if (!ckpt.empty()) {
        model::save_checkpoint(ckpt, model, manifest.normalization,
                               {{"config_hash", report.config_hash},
                                {"train_config", config},
                                {"epoch", epoch},
                                {"val_mae", stats.val_mae},
                                {"val_rmse", stats.val_rmse}});
        report.checkpoint = ckpt.string();
      }
    }
  }
  restore(model, best);
  report.lr_trace = trainer.lr_trace();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!options.output_dir.empty()) {
    std::ofstream out(options.output_dir / "run_report.json");
    out << nlohmann::json(report).dump(2) << '\n';
    if (!out) throw IoError("cannot write run report under " + options.output_dir.string());
  }
  return result;
}

}  // namespace wcam::train
