#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wcam::eval {

// Both throw ArgumentError on empty or mismatched inputs.
double mae(std::span<const double> preds, std::span<const double> targets);
double rmse(std::span<const double> preds, std::span<const double> targets);

struct MetricsReport {
  std::string model;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
  std::string split;
  std::string config_hash;

  MetricsReport() = default;
  // Throws ValidationError when rmse < mae beyond rounding.
  MetricsReport(std::string model, double mae, double rmse, std::size_t count, std::string split,
                std::string config_hash = "");
  static MetricsReport from_predictions(std::string model, std::span<const double> preds,
                                        std::span<const double> targets, std::string split,
                                        std::string config_hash = "");

  bool operator==(const MetricsReport&) const = default;
};

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

}  // namespace wcam::eval
