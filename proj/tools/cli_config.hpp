#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/model/config.hpp"
#include "wcam/train/trainer.hpp"

namespace wcam::cli {

// Bad flags, config keys or values; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kEnvPrefix = "WCAM_";

// Built-in defaults of every section.
nlohmann::json default_config();

// Sets a dotted key, creating objects on the way. The value is parsed as JSON
// when it is valid JSON and kept as a string otherwise.
void set_key(nlohmann::json& doc, const std::string& dotted_key, const std::string& raw_value);
void set_value(nlohmann::json& doc, const std::string& dotted_key, nlohmann::json value);

// "WCAM_TRAIN__BASE_LR" -> "train.base_lr"; empty when the prefix is absent.
std::string env_key(const std::string& variable);

struct Layers {
  std::filesystem::path file;                       // empty: no config file
  std::map<std::string, std::string> env;           // variable name -> value
  std::vector<std::string> sets;                    // "key=value", in order
  std::vector<std::pair<std::string, nlohmann::json>> flags;  // typed subcommand flags, applied last
};

// defaults < file < environment < command line (--set, then flags). Unknown top-level sections
// from the file or the command line are usage errors; unknown environment
// variables are skipped and reported in `ignored`.
nlohmann::json resolve(const Layers& layers, std::vector<std::string>* ignored = nullptr);

// Environment variables carrying the prefix.
std::map<std::string, std::string> prefixed_environment();

model::ModelConfig model_config(const nlohmann::json& doc);
train::TrainConfig train_config(const nlohmann::json& doc);

std::vector<double> parse_number_list(const std::string& text);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
// "n=200,stations=12" -> {n: 200, stations: 12}; a bare number means n.
std::map<std::string, std::string> parse_assignments(const std::string& text, const std::string& bare_key);

}  // namespace wcam::cli
