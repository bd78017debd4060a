#include "cli_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

extern char** environ;

namespace wcam::cli {

nlohmann::json default_config() {
  return {
      {"seed", 0},
      {"workers", 1},
      {"tiny_backbone", false},
      {"model", {{"architecture", "wcamnet"}, {"weights_path", ""}}},
      {"train", nlohmann::json::object()},
      {"data", {{"manifest", ""}, {"split", "test"}}},
      {"ingest", nlohmann::json::object()},
      {"dataset",
       {{"synthetic", ""},
        {"archive", ""},
        {"pairs", ""},
        {"bins", data::kDefaultBins},
        {"resample_target", 0},
        {"tolerance_s", data::kAlignmentTolerance.count()}}},
      {"grid", {{"base_lrs", {1e-3, 1e-2, 1e-1}}, {"weight_decays", {1e-5, 1e-4, 1e-3}}, {"epochs", 0}}},
      {"benchmark", {{"epochs", 0}, {"models", nlohmann::json::array()}}},
      {"ablate", {{"seeds", {1, 2, 3}}, {"epochs", 0}, {"large_weights_path", ""}}},
      {"eval", {{"checkpoint", ""}}},
      {"viz", {{"image", ""}, {"checkpoint", ""}, {"upscale", 8}}},
      {"plot", {{"manifest", ""}, {"run_report", ""}}},
  };
}

void set_value(nlohmann::json& doc, const std::string& dotted_key, nlohmann::json value) {
  if (dotted_key.empty()) throw UsageError("empty config key");
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const auto part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("malformed config key '" + dotted_key + "'");
    if (node->is_null()) *node = nlohmann::json::object();
    if (!node->is_object()) throw UsageError("config key '" + dotted_key + "' descends into a non-object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

void set_key(nlohmann::json& doc, const std::string& dotted_key, const std::string& raw_value) {
  auto parsed = nlohmann::json::parse(raw_value, nullptr, false);
  set_value(doc, dotted_key, parsed.is_discarded() ? nlohmann::json(raw_value) : std::move(parsed));
}

std::string env_key(const std::string& variable) {
  const std::string prefix = kEnvPrefix;
  if (variable.rfind(prefix, 0) != 0 || variable.size() == prefix.size()) return "";
  std::string key;
  const auto rest = variable.substr(prefix.size());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest.compare(i, 2, "__") == 0) {
      key += '.';
      ++i;
    } else {
      key += static_cast<char>(std::tolower(static_cast<unsigned char>(rest[i])));
    }
  }
  return key;
}

std::map<std::string, std::string> prefixed_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const auto name = entry.substr(0, eq);
    if (name.rfind(kEnvPrefix, 0) == 0) out[name] = entry.substr(eq + 1);
  }
  return out;
}

namespace {

std::string top_level(const std::string& key) { return key.substr(0, key.find('.')); }

void check_section(const nlohmann::json& defaults, const std::string& key, const std::string& origin) {
  if (!defaults.contains(top_level(key))) {
    std::string known;
    for (const auto& [k, v] : defaults.items()) known += (known.empty() ? "" : ", ") + k;
    throw UsageError("unknown config key '" + key + "' from " + origin + "; top-level keys: " + known);
  }
}

}  // namespace

nlohmann::json resolve(const Layers& layers, std::vector<std::string>* ignored) {
  const auto defaults = default_config();
  auto doc = defaults;
  if (!layers.file.empty()) {
    std::ifstream in(layers.file);
    if (!in) throw UsageError("cannot open config file " + layers.file.string());
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file " + layers.file.string() + " is not valid JSON: " + e.what());
    }
    if (!file.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [k, v] : file.items()) check_section(defaults, k, "config file");
    doc.merge_patch(file);
  }
  for (const auto& [name, value] : layers.env) {
    const auto key = env_key(name);
    if (key.empty() || !defaults.contains(top_level(key))) {
      if (ignored) ignored->push_back(name);
      continue;
    }
    set_key(doc, key, value);
  }
  for (const auto& s : layers.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    const auto key = s.substr(0, eq);
    check_section(defaults, key, "the command line");
    set_key(doc, key, s.substr(eq + 1));
  }
  for (const auto& [key, value] : layers.flags) set_value(doc, key, value);
  return doc;
}

model::ModelConfig model_config(const nlohmann::json& doc) {
  try {
    const auto& m = doc.at("model");
    const auto arch = model::parse_architecture(m.at("architecture").get<std::string>());
    model::ModelConfig base;
    if (doc.at("tiny_backbone").get<bool>()) {
      base = model::desk_config(arch);
    } else {
      base.architecture = arch;
      base.backbone = model::BackboneSpec::pretrained_base(m.value("weights_path", std::string{}));
      if (arch == model::Architecture::vit_full_finetune) base.backbone.frozen = false;
    }
    auto patch = m;
    patch.erase("architecture");
    patch.erase("weights_path");
    nlohmann::json j = base;
    j["init_seed"] = doc.at("seed");
    j.merge_patch(patch);
    auto config = j.get<model::ModelConfig>();
    config.validate();
    return config;
  } catch (const Error& e) {
    throw UsageError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad model config: ") + e.what());
  }
}

train::TrainConfig train_config(const nlohmann::json& doc) {
  const auto model = model_config(doc);
  try {
    nlohmann::json j = train::recipe(model);
    j.merge_patch(doc.at("train"));
    j["model"] = model;
    auto config = j.get<train::TrainConfig>();
    config.seed = doc.at("seed").get<std::uint64_t>();
    config.workers = doc.at("workers").get<int>();
    config.validate();
    return config;
  } catch (const Error& e) {
    throw UsageError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad train config: ") + e.what());
  }
}

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_commas(text)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError("'" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("expected a comma-separated list of numbers");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_commas(text)) {
    if (item.empty() || !std::all_of(item.begin(), item.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw UsageError("'" + item + "' is not a seed");
    out.push_back(std::stoull(item));
  }
  if (out.empty()) throw UsageError("expected a comma-separated list of seeds");
  return out;
}

std::map<std::string, std::string> parse_assignments(const std::string& text, const std::string& bare_key) {
  std::map<std::string, std::string> out;
  for (const auto& item : split_commas(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      out[bare_key] = item;
    } else {
      if (eq == 0) throw UsageError("malformed assignment '" + item + "'");
      out[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  return out;
}

}  // namespace wcam::cli
