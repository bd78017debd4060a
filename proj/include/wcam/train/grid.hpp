#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/train/trainer.hpp"

namespace wcam::train {

struct GridSpec {
  std::vector<double> base_lrs{1e-3, 1e-2, 1e-1};
  std::vector<double> weight_decays{1e-5, 1e-4, 1e-3};
  int epochs = 0;  // > 0 shortens every cell to this many epochs
};

struct GridCell {
  double base_lr = 0.0;
  double weight_decay = 0.0;
  std::optional<RunReport> report;
  std::string error;  // set when the cell failed

  bool ok() const { return report.has_value(); }
};

struct GridResult {
  TrainConfig best;
  std::size_t best_cell = 0;
  std::vector<GridCell> cells;  // sorted by (base_lr, weight_decay)
};

void to_json(nlohmann::json& j, const GridResult& r);

class GridSearchFailed : public TrainingDiverged {
 public:
  GridSearchFailed(const std::string& what, std::vector<GridCell> cells)
      : TrainingDiverged(what), cells_(std::move(cells)) {}
  const std::vector<GridCell>& cells() const { return cells_; }

 private:
  std::vector<GridCell> cells_;
};

using CellRunner = std::function<RunReport(const TrainConfig&)>;

// Runs every (base_lr, weight_decay) cell and picks the lowest best-epoch
// validation MAE; ties go to the lower base_lr, then the lower weight_decay.
// A throwing cell is recorded as failed. Throws GridSearchFailed when no cell
// succeeds.
GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const CellRunner& runner);

// Trains each cell with train(); cell outputs go to
// <output_dir>/lr<lr>_wd<wd>/ when an output directory is set.
GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const data::DatasetManifest& manifest,
                       const TrainOptions& options = {});

std::string cell_name(double base_lr, double weight_decay);

}  // namespace wcam::train
