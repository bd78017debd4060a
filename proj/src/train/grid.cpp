#include "wcam/train/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace wcam::train {

std::string cell_name(double base_lr, double weight_decay) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "lr%g_wd%g", base_lr, weight_decay);
  return buf;
}

void to_json(nlohmann::json& j, const GridResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json cell = {{"base_lr", c.base_lr}, {"weight_decay", c.weight_decay}};
    if (c.ok()) {
      cell["best_val_mae"] = c.report->best_val_mae;
      cell["best_epoch"] = c.report->best_epoch;
      cell["config_hash"] = c.report->config_hash;
    } else {
      cell["error"] = c.error;
    }
    cells.push_back(cell);
  }
  j = {{"best", r.best}, {"best_cell", r.best_cell}, {"cells", cells}};
}

GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const CellRunner& runner) {
  if (grid.base_lrs.empty() || grid.weight_decays.empty()) throw ConfigError("grid search needs a non-empty grid");
  auto lrs = grid.base_lrs;
  auto wds = grid.weight_decays;
  std::sort(lrs.begin(), lrs.end());
  lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());
  std::sort(wds.begin(), wds.end());
  wds.erase(std::unique(wds.begin(), wds.end()), wds.end());

  GridResult result;
  std::optional<std::size_t> best;
  for (double lr : lrs)
    for (double wd : wds) {
      auto config = base;
      config.base_lr = lr;
      config.weight_decay = wd;
      if (grid.epochs > 0) config.epochs = grid.epochs;
      GridCell cell{lr, wd, std::nullopt, {}};
      try {
        cell.report = runner(config);
      } catch (const Error& e) {
        cell.error = e.what();
      }
      result.cells.push_back(std::move(cell));
      const auto& c = result.cells.back();
      // Cells arrive in (lr, wd) order, so a strict improvement keeps the tie rule.
      if (c.ok() && (!best || c.report->best_val_mae < result.cells[*best].report->best_val_mae))
        best = result.cells.size() - 1;
    }
  if (!best) throw GridSearchFailed("every grid cell failed", result.cells);
  result.best_cell = *best;
  result.best = base;
  result.best.base_lr = result.cells[*best].base_lr;
  result.best.weight_decay = result.cells[*best].weight_decay;
  return result;
}

GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const data::DatasetManifest& manifest,
                       const TrainOptions& options) {
  auto result = grid_search(grid, base, [&](const TrainConfig& config) {
    auto cell_options = options;
    if (!options.output_dir.empty())
      cell_options.output_dir = options.output_dir / cell_name(config.base_lr, config.weight_decay);
    return train(config, manifest, cell_options).report;
  });
  if (!options.output_dir.empty()) {
    std::ofstream out(options.output_dir / "grid_search.json");
    out << nlohmann::json(result).dump(2) << '\n';
  }
  return result;
}

}  // namespace wcam::train
