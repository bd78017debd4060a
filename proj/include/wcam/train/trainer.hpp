#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/data/loader.hpp"
#include "wcam/data/manifest.hpp"
#include "wcam/model/models.hpp"
#include "wcam/train/optimizer.hpp"
#include "wcam/train/schedule.hpp"

namespace wcam::train {

using Model = model::RegressionModel<float>;

struct TrainConfig {
  model::ModelConfig model;
  int epochs = 15;
  int batch_size = 16;
  double base_lr = 0.01;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  ScheduleSpec schedule;
  std::uint64_t seed = 0;
  bool augment = true;
  int workers = 1;  // image loading threads; results do not depend on it

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// FNV-1a of the canonical JSON form, minus fields that cannot change results
// (worker count).
std::string config_hash(const TrainConfig& config);

// Epoch count and schedule of each architecture's training recipe.
TrainConfig recipe(model::Architecture architecture);
TrainConfig recipe(const model::ModelConfig& model);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
  double val_rmse = 0.0;
  double seconds = 0.0;
};

struct LrPoint {
  double epoch = 0.0;  // schedule position when the step was taken
  double lr = 0.0;
};

struct RunReport {
  std::string model;
  std::string config_hash;
  std::vector<EpochStats> epochs;
  std::vector<LrPoint> lr_trace;  // one entry per optimizer step
  double wall_seconds = 0.0;
  int best_epoch = -1;
  double best_val_mae = 0.0;
  double best_val_rmse = 0.0;
  std::string checkpoint;  // path of the best-epoch checkpoint, empty when not saved
};

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

// One optimizer sequence over a model: scheduled SGD steps on ready batches.
class Trainer {
 public:
  Trainer(const TrainConfig& config, Model& model, std::size_t steps_per_epoch);

  // Forward, MSE loss, backward and one SGD step at the scheduled rate.
  // Throws TrainingDiverged on a non-finite loss.
  double step(const data::Batch& batch);

  // Schedule position of the next step.
  double position() const;
  std::size_t steps() const { return steps_; }
  const std::vector<LrPoint>& lr_trace() const { return trace_; }
  SgdMomentum<float>& optimizer() { return optimizer_; }

 private:
  TrainConfig config_;
  Model& model_;
  std::size_t steps_per_epoch_;
  SgdMomentum<float> optimizer_;
  std::size_t steps_ = 0;
  std::vector<LrPoint> trace_;
};

struct TrainOptions {
  std::filesystem::path output_dir;  // empty: nothing written
  data::DataLoader::ImageReader reader;
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  RunReport report;
  std::unique_ptr<Model> model;  // parameters of the best validation epoch
};

// Trains on the train split, validates every epoch, keeps the best
// validation-MAE parameters. With an output directory, writes best.ckpt and
// run_report.json there.
TrainResult train(const TrainConfig& config, const data::DatasetManifest& manifest, const TrainOptions& options = {});

}  // namespace wcam::train
