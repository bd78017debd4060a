#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/data/manifest.hpp"

namespace wcam::eval {

struct HistogramOptions {
  int bins = data::kDefaultBins;
  // Resampling target when the manifest was built without resampling;
  // 0 means half the samples.
  long long resample_target = 0;
  std::uint64_t seed = 0;
};

struct FrictionHistograms {
  int bins = 0;
  std::vector<double> edges;         // bins + 1
  std::vector<std::size_t> before;   // counts before resampling
  std::vector<std::size_t> after;    // counts after resampling
  bool from_build = false;           // both counts taken from the manifest build
};

void to_json(nlohmann::json& j, const FrictionHistograms& h);

// A manifest built with resampling records its input histogram; that is the
// "before" and the manifest's own samples are the "after". Otherwise the
// manifest is the "before" and weighted_resample provides the "after".
FrictionHistograms friction_histograms(const data::DatasetManifest& manifest, const HistogramOptions& options = {});

// Writes friction_histogram.png and friction_histogram.json into dir.
FrictionHistograms plot_histograms(const data::DatasetManifest& manifest, const std::filesystem::path& dir,
                                   const HistogramOptions& options = {});

}  // namespace wcam::eval
