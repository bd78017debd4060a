#include "wcam/eval/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "wcam/eval/render.hpp"

namespace wcam::eval {

namespace {

double mean_of(const std::vector<MetricsReport>& runs, double MetricsReport::*field) {
  if (runs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const auto& r : runs) s += r.*field;
  return s / static_cast<double>(runs.size());
}

std::vector<std::size_t> argmins(const ComparisonTable& t, double (ComparisonRow::*metric)() const) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows)
    if (!r.failed()) best = std::min(best, (r.*metric)());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (!t.rows[i].failed() && (t.rows[i].*metric)() == best) out.push_back(i);
  return out;
}

std::string cell(double v, bool bold) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return bold ? "**" + std::string(buf) + "**" : std::string(buf);
}

const std::map<model::Architecture, Reference>& benchmark_references() {
  static const std::map<model::Architecture, Reference> refs = {
      {model::Architecture::wcamnet, {0.150, 0.195}},
      {model::Architecture::resnet50_style, {0.184, 0.233}},
      {model::Architecture::resnet152_style, {0.201, 0.260}},
      {model::Architecture::vgg19_style, {0.166, 0.210}},
      {model::Architecture::backbone_linear_head, {0.172, 0.219}},
      {model::Architecture::vit_full_finetune, {0.183, 0.232}},
  };
  return refs;
}

}  // namespace

double ComparisonRow::mae() const { return mean_of(runs, &MetricsReport::mae); }
double ComparisonRow::rmse() const { return mean_of(runs, &MetricsReport::rmse); }

const ComparisonRow& ComparisonTable::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw ArgumentError("table '" + title + "' has no row '" + name + "'");
}

std::vector<std::size_t> ComparisonTable::best_mae_rows() const { return argmins(*this, &ComparisonRow::mae); }
std::vector<std::size_t> ComparisonTable::best_rmse_rows() const { return argmins(*this, &ComparisonRow::rmse); }

std::string ComparisonTable::markdown() const {
  const auto best_mae = best_mae_rows(), best_rmse = best_rmse_rows();
  auto in = [](const std::vector<std::size_t>& v, std::size_t i) { return std::find(v.begin(), v.end(), i) != v.end(); };
  std::ostringstream out;
  out << "## " << title << "\n\n";
  out << "| Model | MAE | RMSE | Runs | Reference MAE | Reference RMSE |\n";
  out << "|---|---|---|---|---|---|\n";
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto total = r.runs.size() + r.errors.size();
    out << "| " << r.name << " | ";
    if (r.failed()) {
      out << "failed | failed | ";
    } else {
      out << cell(r.mae(), in(best_mae, i)) << " | " << cell(r.rmse(), in(best_rmse, i)) << " | ";
    }
    out << r.runs.size() << "/" << total << " | ";
    if (r.reference) {
      out << cell(r.reference->mae, false) << " | " << cell(r.reference->rmse, false) << " |\n";
    } else {
      out << "- | - |\n";
    }
    for (const auto& e : r.errors) notes.push_back(r.name + ": " + e);
  }
  if (!notes.empty()) {
    out << "\nFailures:\n\n";
    for (const auto& n : notes) out << "- " << n << "\n";
  }
  return out.str();
}

void to_json(nlohmann::json& j, const ComparisonTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  const auto best_mae = t.best_mae_rows(), best_rmse = t.best_rmse_rows();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    nlohmann::json row = {{"name", r.name}, {"failed", r.failed()}, {"errors", r.errors}};
    if (!r.failed()) {
      row["mae"] = r.mae();
      row["rmse"] = r.rmse();
      row["best_mae"] = std::find(best_mae.begin(), best_mae.end(), i) != best_mae.end();
      row["best_rmse"] = std::find(best_rmse.begin(), best_rmse.end(), i) != best_rmse.end();
    }
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t k = 0; k < r.runs.size(); ++k) {
      nlohmann::json run = r.runs[k];
      run["seed"] = r.seeds[k];
      runs.push_back(run);
    }
    row["runs"] = runs;
    if (r.reference) row["reference"] = {{"mae", r.reference->mae}, {"rmse", r.reference->rmse}};
    rows.push_back(row);
  }
  j = {{"title", t.title}, {"rows", rows}};
}

data::Image render_table(const ComparisonTable& t) {
  std::vector<std::string> names;
  BarSeries mae{"MAE", {}}, rmse{"RMSE", {}};
  for (const auto& r : t.rows) {
    names.push_back(r.name);
    mae.values.push_back(r.mae());
    rmse.values.push_back(r.rmse());
  }
  return bar_chart(t.title, names, {mae, rmse});
}

void write_table(const ComparisonTable& t, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (stem + ".json"));
    out << nlohmann::json(t).dump(2) << '\n';
    if (!out) throw IoError("cannot write " + (dir / (stem + ".json")).string());
  }
  {
    std::ofstream out(dir / (stem + ".md"));
    out << t.markdown();
    if (!out) throw IoError("cannot write " + (dir / (stem + ".md")).string());
  }
  data::write_png(dir / (stem + ".png"), render_table(t));
}

train::TrainConfig run_config(const ExperimentEntry& entry, std::uint64_t seed, const ExperimentOptions& options) {
  auto config = entry.config;
  config.seed = seed;
  config.model.init_seed = seed;
  if (options.epochs > 0) config.epochs = options.epochs;
  return config;
}

namespace {

MetricsReport default_run(const ExperimentEntry& entry, std::uint64_t seed, const data::DatasetManifest& manifest,
                          const ExperimentOptions& options) {
  EvaluateOptions eo;
  eo.workers = options.workers;
  eo.reader = options.reader;
  if (const auto it = options.checkpoints.find(entry.name); it != options.checkpoints.end()) {
    auto report = evaluate(it->second, manifest, data::Split::test, eo);
    report.model = entry.name;
    return report;
  }
  const auto config = run_config(entry, seed, options);
  train::TrainOptions to;
  to.reader = options.reader;
  if (!options.output_dir.empty()) to.output_dir = options.output_dir / entry.name / ("seed" + std::to_string(seed));
  auto result = train::train(config, manifest, to);
  eo.batch_size = config.batch_size;
  auto report = evaluate(*result.model, manifest.normalization, manifest, data::Split::test, result.report.config_hash, eo);
  report.model = entry.name;
  return report;
}

}  // namespace

ComparisonTable run_comparison(const std::string& title, const std::vector<ExperimentEntry>& entries,
                               const data::DatasetManifest& manifest, const ExperimentOptions& options) {
  if (options.seeds.empty()) throw ConfigError("at least one seed is required");
  ComparisonTable table{title, {}};
  for (const auto& entry : entries) {
    ComparisonRow row;
    row.name = entry.name;
    row.reference = entry.reference;
    for (const auto seed : options.seeds) {
      try {
        row.runs.push_back(options.runner ? options.runner(entry, seed) : default_run(entry, seed, manifest, options));
        row.seeds.push_back(seed);
      } catch (const std::exception& e) {
        row.errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
      }
    }
    if (options.on_row) options.on_row(row);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<ExperimentEntry> benchmark_entries(const model::ModelConfig& base) {
  std::vector<ExperimentEntry> out;
  for (const auto& name : model::registered_architectures()) {
    const auto arch = model::parse_architecture(name);
    auto config = base;
    config.architecture = arch;
    config.use_hd_branch = true;
    config.use_se_blocks = true;
    if (arch == model::Architecture::vit_full_finetune) {
      config.backbone.frozen = false;
      if (config.backbone.depth == 0) {
        const auto desk = model::desk_config(arch).backbone;
        config.backbone.depth = desk.depth;
        config.backbone.heads = desk.heads;
      }
    } else {
      config.backbone.frozen = true;
    }
    out.push_back({name, train::recipe(config), benchmark_references().at(arch)});
  }
  return out;
}

ComparisonTable run_benchmark(const std::vector<ExperimentEntry>& entries, const data::DatasetManifest& manifest,
                              const ExperimentOptions& options) {
  return run_comparison("Benchmark", entries, manifest, options);
}

std::vector<ExperimentEntry> ablation_entries(const train::TrainConfig& base, const std::string& large_weights_path) {
  if (base.model.architecture != model::Architecture::wcamnet) throw ConfigError("ablations need a wcamnet base config");
  auto full = base;
  full.model.use_hd_branch = true;
  full.model.use_se_blocks = true;

  auto large = full;
  if (full.model.backbone.pretrained()) {
    large.model.backbone = model::BackboneSpec::pretrained_large(large_weights_path);
  } else {
    large.model.backbone.embed_dim = kDeskLargeEmbedDim;
  }
  auto no_se = full;
  no_se.model.use_se_blocks = false;
  auto no_hd = full;
  no_hd.model.use_hd_branch = false;
  return {{"wcamnet", full, Reference{0.150, 0.195}},
          {"wcamnet-large-backbone", large, Reference{0.155, 0.197}},
          {"wcamnet-no-se", no_se, Reference{0.167, 0.213}},
          {"wcamnet-no-hd", no_hd, Reference{0.170, 0.217}}};
}

ComparisonTable run_ablations(const train::TrainConfig& base, const data::DatasetManifest& manifest,
                              ExperimentOptions options, const std::string& large_weights_path) {
  return run_comparison("Ablations", ablation_entries(base, large_weights_path), manifest, options);
}

DirectionCheck compare_rows(const ComparisonRow& reference, const ComparisonRow& variant) {
  DirectionCheck d;
  double ref_sum = 0.0, var_sum = 0.0;
  for (std::size_t i = 0; i < reference.runs.size(); ++i) {
    const auto it = std::find(variant.seeds.begin(), variant.seeds.end(), reference.seeds[i]);
    if (it == variant.seeds.end()) continue;
    const auto& v = variant.runs[static_cast<std::size_t>(it - variant.seeds.begin())];
    ref_sum += reference.runs[i].mae;
    var_sum += v.mae;
    ++d.seeds_compared;
    if (reference.runs[i].mae <= v.mae) ++d.seeds_held;
  }
  if (d.seeds_compared == 0) throw ArgumentError("rows '" + reference.name + "' and '" + variant.name + "' share no seed");
  d.reference_mae = ref_sum / d.seeds_compared;
  d.variant_mae = var_sum / d.seeds_compared;
  return d;
}

}  // namespace wcam::eval
