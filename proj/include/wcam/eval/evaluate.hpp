#pragma once

#include <filesystem>

#include "wcam/eval/metrics.hpp"
#include "wcam/eval/predict.hpp"

namespace wcam::eval {

struct EvaluateOptions {
  const model::ModelConfig* expected_config = nullptr;  // set to reject a checkpoint trained otherwise
  int batch_size = 16;
  int workers = 1;
  data::DataLoader::ImageReader reader;
};

// Scores a model on one split. The manifest's normalization is replaced by
// `normalization`, which should be the one the model was trained with.
MetricsReport evaluate(model::RegressionModel<float>& model, const data::Normalization& normalization,
                       const data::DatasetManifest& manifest, data::Split split, const std::string& config_hash,
                       const EvaluateOptions& options = {});

// Loads the checkpoint and scores it. The report's config hash comes from the
// checkpoint metadata, or from the model config when the metadata has none.
// Throws CheckpointError on a config mismatch and ConfigError on an empty split.
MetricsReport evaluate(const std::filesystem::path& checkpoint, const data::DatasetManifest& manifest,
                       data::Split split, const EvaluateOptions& options = {});

}  // namespace wcam::eval
