#include "wcam/eval/metrics.hpp"

#include <cmath>

#include "wcam/util/error.hpp"

namespace wcam::eval {

namespace {

void check(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size())
    throw ArgumentError("prediction/target length mismatch: " + std::to_string(preds.size()) + " vs " +
                        std::to_string(targets.size()));
  if (preds.empty()) throw ArgumentError("metrics need at least one prediction");
}

}  // namespace

double mae(std::span<const double> preds, std::span<const double> targets) {
  check(preds, targets);
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += std::abs(preds[i] - targets[i]);
  return sum / static_cast<double>(preds.size());
}

double rmse(std::span<const double> preds, std::span<const double> targets) {
  check(preds, targets);
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  return std::sqrt(sum / static_cast<double>(preds.size()));
}

MetricsReport::MetricsReport(std::string model_, double mae_, double rmse_, std::size_t count_, std::string split_,
                             std::string config_hash_)
    : model(std::move(model_)),
      mae(mae_),
      rmse(rmse_),
      count(count_),
      split(std::move(split_)),
      config_hash(std::move(config_hash_)) {
  if (!(mae >= 0.0) || !(rmse >= 0.0)) throw ValidationError("metrics must be finite and non-negative");
  if (rmse < mae * (1.0 - 1e-12) - 1e-15)
    throw ValidationError("RMSE " + std::to_string(rmse) + " below MAE " + std::to_string(mae));
}

MetricsReport MetricsReport::from_predictions(std::string model, std::span<const double> preds,
                                              std::span<const double> targets, std::string split,
                                              std::string config_hash) {
  return {std::move(model), eval::mae(preds, targets), eval::rmse(preds, targets), preds.size(), std::move(split),
          std::move(config_hash)};
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = {{"model", r.model}, {"mae", r.mae},     {"rmse", r.rmse},
       {"count", r.count}, {"split", r.split}, {"config_hash", r.config_hash}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r = MetricsReport(j.at("model").get<std::string>(), j.at("mae").get<double>(), j.at("rmse").get<double>(),
                    j.at("count").get<std::size_t>(), j.at("split").get<std::string>(),
                    j.value("config_hash", std::string{}));
}

}  // namespace wcam::eval
