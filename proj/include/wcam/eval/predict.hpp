#pragma once

#include <vector>

#include "wcam/data/loader.hpp"
#include "wcam/model/models.hpp"

namespace wcam::eval {

struct Predictions {
  std::vector<double> preds;
  std::vector<double> targets;
  std::vector<std::size_t> indices;  // manifest sample indices
};

// Evaluation-mode forward over one split, in manifest order, no augmentation.
Predictions predict(model::RegressionModel<float>& model, const data::DatasetManifest& manifest, data::Split split,
                    int batch_size = 16, const data::DataLoader::ImageReader& reader = {}, int workers = 1);

}  // namespace wcam::eval
