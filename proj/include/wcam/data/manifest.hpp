#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/data/labels.hpp"
#include "wcam/data/normalization.hpp"
#include "wcam/data/sampling.hpp"

namespace wcam::data {

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestFormat = "wcam-manifest";

// Line-delimited JSON: one header object, then one object per sample.
struct DatasetManifest {
  std::uint64_t seed = 0;
  Normalization normalization;
  std::string interpolation = "bilinear";
  SplitAssignment splits;
  std::vector<LabeledSample> samples;
  nlohmann::json info = nlohmann::json::object();  // free-form build statistics

  // Directory image references resolve against; not serialized.
  std::filesystem::path root;

  Split split_of(const LabeledSample& s) const;
  std::vector<std::size_t> indices(Split split) const;
  std::filesystem::path image_path(const LabeledSample& s) const { return root / s.image_ref; }
};

std::string manifest_text(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& root = {});

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Station sets of the three splits, taken from the manifest records.
bool manifest_has_no_leakage(const DatasetManifest& manifest);

// Per-channel statistics of the train split after resizing, on the [0, 1] scale.
Normalization compute_normalization(const DatasetManifest& manifest, int workers = 1);

struct BuildOptions {
  SplitFractions fractions = kDefaultSplitFractions;
  std::uint64_t seed = 0;
  int bins = kDefaultBins;
  long long resample_target = 0;  // 0 keeps every sample
  int workers = 1;
};

// Resample, split by station, then compute train statistics. Images are read
// from `root` for the statistics.
DatasetManifest build_manifest(const std::vector<LabeledSample>& samples, const std::filesystem::path& root,
                               const BuildOptions& options);

}  // namespace wcam::data
