#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "cli_config.hpp"
#include "commands.hpp"

namespace {

using wcam::cli::UsageError;
using Flags = std::vector<std::pair<std::string, nlohmann::json>>;

struct Options {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string output_dir = "wcam-out";
  bool tiny_backbone = false;
  bool dry_run = false;
  std::vector<std::string> sets;
};

// Collects "if given, set key" actions for one subcommand.
class FlagTable {
 public:
  explicit FlagTable(CLI::App* app) : app_(app) {}

  template <typename T>
  void add(const std::string& name, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    app_->add_option(name, *value, help);
    actions_.push_back([app = app_, name, key, value](Flags& flags) {
      if (app->count(name)) flags.emplace_back(key, *value);
    });
  }

  void add_numbers(const std::string& name, const std::string& key, const std::string& help) {
    add_parsed(name, key, help, [](const std::string& s) { return nlohmann::json(wcam::cli::parse_number_list(s)); });
  }
  void add_seeds(const std::string& name, const std::string& key, const std::string& help) {
    add_parsed(name, key, help, [](const std::string& s) { return nlohmann::json(wcam::cli::parse_seed_list(s)); });
  }
  void add_names(const std::string& name, const std::string& key, const std::string& help) {
    add_parsed(name, key, help, [](const std::string& s) {
      nlohmann::json out = nlohmann::json::array();
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
      return out;
    });
  }

  void collect(Flags& flags) const {
    for (const auto& a : actions_) a(flags);
  }

 private:
  template <typename F>
  void add_parsed(const std::string& name, const std::string& key, const std::string& help, F parse) {
    auto value = std::make_shared<std::string>();
    app_->add_option(name, *value, help);
    actions_.push_back([app = app_, name, key, value, parse](Flags& flags) {
      if (app->count(name)) flags.emplace_back(key, parse(*value));
    });
  }

  CLI::App* app_;
  std::vector<std::function<void(Flags&)>> actions_;
};

void add_train_flags(FlagTable& t) {
  t.add<std::string>("--manifest", "data.manifest", "Dataset manifest (manifest.jsonl)");
  t.add<std::string>("--model", "model.architecture", "Architecture name");
  t.add<std::string>("--weights", "model.weights_path", "Pretrained backbone weights");
  t.add<int>("--grid-side", "model.grid_side", "Patch grid side (input side = grid side x patch size)");
  t.add<int>("--epochs", "train.epochs", "Training epochs");
  t.add<double>("--lr", "train.base_lr", "Base learning rate");
  t.add<double>("--weight-decay", "train.weight_decay", "Weight decay");
  t.add<int>("--batch-size", "train.batch_size", "Batch size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road friction estimation from roadside camera images"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "Random seed");
  app.add_option("--output-dir", opt.output_dir, "Directory for every file the command writes");
  app.add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--tiny-backbone", opt.tiny_backbone, "Use the small randomly initialised backbone");
  app.add_flag("--dry-run", opt.dry_run, "Validate and describe the run without writing anything");
  app.add_option("--set", opt.sets, "Override a config key (key=value, dotted keys)");

  std::vector<std::pair<CLI::App*, FlagTable>> tables;
  auto sub = [&](const char* name, const char* help) -> FlagTable& {
    auto* s = app.add_subcommand(name, help);
    tables.emplace_back(s, FlagTable(s));
    return tables.back().second;
  };
  tables.reserve(9);

  auto& ingest = sub("ingest", "Poll camera images and friction readings into an archive");
  ingest.add<std::string>("--pairs", "ingest.pairs_file", "Station pairing table (JSON)");
  ingest.add<std::string>("--base-url", "ingest.base_url", "Road data API base URL");
  ingest.add<std::string>("--token", "ingest.token", "API bearer token");
  ingest.add<int>("--duration", "ingest.duration_s", "Collection duration in seconds");
  ingest.add<int>("--cadence", "ingest.cadence_s", "Seconds between polls");

  auto& build = sub("build-dataset", "Build a labelled, split dataset manifest");
  build.add<std::string>("--synthetic", "dataset.synthetic", "Synthetic scenes: n=200[,stations=12,width=,height=,skewed=1,mask=1,resample=]");
  build.add<std::string>("--archive", "dataset.archive", "Ingest archive directory");
  build.add<std::string>("--pairs", "dataset.pairs", "Station pairing table for the archive");
  build.add<long long>("--resample", "dataset.resample_target", "Friction-balanced resample size (0: none)");
  build.add<int>("--bins", "dataset.bins", "Friction histogram bins");

  add_train_flags(sub("train", "Train one model"));

  auto& grid = sub("gridsearch", "Search base learning rate and weight decay");
  add_train_flags(grid);
  grid.add_numbers("--lrs", "grid.base_lrs", "Comma-separated base learning rates");
  grid.add_numbers("--wds", "grid.weight_decays", "Comma-separated weight decays");
  grid.add<int>("--cell-epochs", "grid.epochs", "Epochs per cell (0: from the training config)");

  auto& ev = sub("eval", "Score a checkpoint on a dataset split");
  ev.add<std::string>("--checkpoint", "eval.checkpoint", "Checkpoint file");
  ev.add<std::string>("--manifest", "data.manifest", "Dataset manifest");
  ev.add<std::string>("--split", "data.split", "train, val or test");
  ev.add<std::string>("--model", "model.architecture", "Expected architecture");

  auto& bench = sub("benchmark", "Train and compare every registered architecture");
  bench.add<std::string>("--manifest", "data.manifest", "Dataset manifest");
  bench.add_names("--models", "benchmark.models", "Comma-separated subset of architectures");
  bench.add<int>("--epochs", "benchmark.epochs", "Epochs per model (0: each model's recipe)");
  bench.add<int>("--grid-side", "model.grid_side", "Patch grid side");

  auto& ablate = sub("ablate", "Ablate the HD branch, SE blocks and backbone size");
  ablate.add<std::string>("--manifest", "data.manifest", "Dataset manifest");
  ablate.add_seeds("--seeds", "ablate.seeds", "Comma-separated seeds");
  ablate.add<int>("--epochs", "ablate.epochs", "Epochs per run (0: recipe)");
  ablate.add<int>("--grid-side", "model.grid_side", "Patch grid side");
  ablate.add<std::string>("--large-weights", "ablate.large_weights_path", "Weights for the large backbone");

  auto& viz = sub("viz", "Render the first three principal components of backbone tokens");
  viz.add<std::string>("--image", "viz.image", "Input image");
  viz.add<std::string>("--checkpoint", "viz.checkpoint", "Take the backbone from this checkpoint");
  viz.add<std::string>("--manifest", "data.manifest", "Take normalization from this manifest");
  viz.add<int>("--upscale", "viz.upscale", "Pixels per token");
  viz.add<std::string>("--model", "model.architecture", "Architecture when no checkpoint is given");
  viz.add<std::string>("--weights", "model.weights_path", "Backbone weights when no checkpoint is given");

  auto& plot = sub("plot", "Plot friction histograms and training curves");
  plot.add<std::string>("--manifest", "plot.manifest", "Dataset manifest");
  plot.add<std::string>("--run-report", "plot.run_report", "run_report.json from train");
  plot.add<int>("--bins", "dataset.bins", "Histogram bins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  wcam::cli::Context ctx;
  ctx.out = &std::cout;
  ctx.log = &std::cerr;
  ctx.dry_run = opt.dry_run;
  ctx.output_dir = opt.output_dir;
  try {
    wcam::cli::Layers layers;
    layers.file = opt.config_file;
    layers.env = wcam::cli::prefixed_environment();
    layers.sets = opt.sets;
    for (const auto& [s, table] : tables) {
      if (!s->parsed()) continue;
      ctx.command = s->get_name();
      table.collect(layers.flags);
    }
    if (opt.seed) layers.flags.emplace_back("seed", *opt.seed);
    if (opt.workers) layers.flags.emplace_back("workers", *opt.workers);
    if (opt.tiny_backbone) layers.flags.emplace_back("tiny_backbone", true);
    std::vector<std::string> ignored;
    ctx.config = wcam::cli::resolve(layers, &ignored);
    for (const auto& name : ignored) std::cerr << "warning: ignoring environment variable " << name << "\n";
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    static const std::map<std::string, void (*)(const wcam::cli::Context&)> commands{
        {"ingest", wcam::cli::cmd_ingest},       {"build-dataset", wcam::cli::cmd_build_dataset},
        {"train", wcam::cli::cmd_train},         {"gridsearch", wcam::cli::cmd_gridsearch},
        {"eval", wcam::cli::cmd_eval},           {"benchmark", wcam::cli::cmd_benchmark},
        {"ablate", wcam::cli::cmd_ablate},       {"viz", wcam::cli::cmd_viz},
        {"plot", wcam::cli::cmd_plot},
    };
    commands.at(ctx.command)(ctx);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const wcam::BackboneUnavailable& e) {
    std::cerr << "error: " << e.what() << " (pass --weights, or --tiny-backbone for a randomly initialised one)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
