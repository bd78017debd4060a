#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/eval/evaluate.hpp"
#include "wcam/train/trainer.hpp"

namespace wcam::eval {

// Published test-set numbers, carried along as metadata only.
struct Reference {
  double mae = 0.0;
  double rmse = 0.0;
};

struct ComparisonRow {
  std::string name;
  std::vector<std::uint64_t> seeds;  // seeds of the successful runs
  std::vector<MetricsReport> runs;
  std::vector<std::string> errors;
  std::optional<Reference> reference;

  bool failed() const { return runs.empty(); }
  // Means over successful runs; NaN for a failed row.
  double mae() const;
  double rmse() const;
};

struct ComparisonTable {
  std::string title;
  std::vector<ComparisonRow> rows;

  const ComparisonRow& row(const std::string& name) const;
  // Rows holding the column minimum; empty when every row failed.
  std::vector<std::size_t> best_mae_rows() const;
  std::vector<std::size_t> best_rmse_rows() const;
  // Markdown with the best value of each column in bold.
  std::string markdown() const;
};

void to_json(nlohmann::json& j, const ComparisonTable& t);
data::Image render_table(const ComparisonTable& t);
// Writes <stem>.json, <stem>.md and <stem>.png into dir.
void write_table(const ComparisonTable& t, const std::filesystem::path& dir, const std::string& stem);

struct ExperimentEntry {
  std::string name;
  train::TrainConfig config;
  std::optional<Reference> reference;
};

using ExperimentRunner = std::function<MetricsReport(const ExperimentEntry& entry, std::uint64_t seed)>;

struct ExperimentOptions {
  std::vector<std::uint64_t> seeds{1};
  int epochs = 0;                        // > 0 overrides every recipe
  std::filesystem::path output_dir;      // runs go to <output_dir>/<name>/seed<k>
  std::map<std::string, std::filesystem::path> checkpoints;  // rows scored from a checkpoint instead of trained
  data::DataLoader::ImageReader reader;
  int workers = 1;
  std::function<void(const ComparisonRow&)> on_row;
  ExperimentRunner runner;               // empty: train, then score the test split
};

// Config of one run: the entry's config with seed and init_seed set to `seed`
// and the epoch override applied.
train::TrainConfig run_config(const ExperimentEntry& entry, std::uint64_t seed, const ExperimentOptions& options);

// One row per entry, in order. A run that throws is recorded in the row's
// errors and the remaining runs continue.
ComparisonTable run_comparison(const std::string& title, const std::vector<ExperimentEntry>& entries,
                               const data::DatasetManifest& manifest, const ExperimentOptions& options = {});

// The six compared architectures sharing the backbone, grid and width of
// `base`. The fine-tuned transformer gets at least one block.
std::vector<ExperimentEntry> benchmark_entries(const model::ModelConfig& base);

ComparisonTable run_benchmark(const std::vector<ExperimentEntry>& entries, const data::DatasetManifest& manifest,
                              const ExperimentOptions& options = {});

inline constexpr model::Index kDeskLargeEmbedDim = 48;

// Rows: base, large backbone, without SE blocks, without HD branch. A tiny
// base backbone is "enlarged" to kDeskLargeEmbedDim; a pretrained base swaps
// to the large pretrained backbone at `large_weights_path`.
std::vector<ExperimentEntry> ablation_entries(const train::TrainConfig& base, const std::string& large_weights_path = "");

ComparisonTable run_ablations(const train::TrainConfig& base, const data::DatasetManifest& manifest,
                              ExperimentOptions options = {}, const std::string& large_weights_path = "");

struct DirectionCheck {
  double reference_mae = 0.0;  // mean over shared seeds
  double variant_mae = 0.0;
  int seeds_held = 0;          // seeds with reference MAE <= variant MAE
  int seeds_compared = 0;

  bool mean_holds() const { return reference_mae <= variant_mae; }
  bool majority_holds() const { return 2 * seeds_held > seeds_compared; }
};

// Compares the two rows on the seeds both completed.
DirectionCheck compare_rows(const ComparisonRow& reference, const ComparisonRow& variant);

}  // namespace wcam::eval
