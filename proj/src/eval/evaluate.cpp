#include "wcam/eval/evaluate.hpp"

#include "wcam/util/hash.hpp"

namespace wcam::eval {

MetricsReport evaluate(model::RegressionModel<float>& model, const data::Normalization& normalization,
                       const data::DatasetManifest& manifest, data::Split split, const std::string& config_hash,
                       const EvaluateOptions& options) {
  if (manifest.indices(split).empty()) throw ConfigError("split '" + data::to_string(split) + "' has no samples");
  auto scored = manifest;
  scored.normalization = normalization;
  const auto p = predict(model, scored, split, options.batch_size, options.reader, options.workers);
  return MetricsReport::from_predictions(model::to_string(model.config().architecture), p.preds, p.targets,
                                         data::to_string(split), config_hash);
}

MetricsReport evaluate(const std::filesystem::path& checkpoint, const data::DatasetManifest& manifest,
                       data::Split split, const EvaluateOptions& options) {
  auto loaded = model::load_checkpoint<float>(checkpoint, options.expected_config);
  std::string hash;
  if (loaded.metadata.contains("config_hash")) {
    hash = loaded.metadata.at("config_hash").get<std::string>();
  } else {
    hash = hex64(fnv1a(nlohmann::json(loaded.model->config()).dump()));
  }
  return evaluate(*loaded.model, loaded.normalization, manifest, split, hash, options);
}

}  // namespace wcam::eval
