#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "wcam/util/error.hpp"

namespace wcam::cli {

// A command ran but produced nothing usable; maps to exit code 2.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::string command;
  nlohmann::json config;  // resolved
  std::filesystem::path output_dir;
  bool dry_run = false;
  std::ostream* out = nullptr;  // results
  std::ostream* log = nullptr;  // progress and warnings
};

// Writes <output_dir>/resolved_config.json.
void write_resolved_config(const Context& ctx);

void cmd_ingest(const Context& ctx);
void cmd_build_dataset(const Context& ctx);
void cmd_train(const Context& ctx);
void cmd_gridsearch(const Context& ctx);
void cmd_eval(const Context& ctx);
void cmd_benchmark(const Context& ctx);
void cmd_ablate(const Context& ctx);
void cmd_viz(const Context& ctx);
void cmd_plot(const Context& ctx);

}  // namespace wcam::cli
