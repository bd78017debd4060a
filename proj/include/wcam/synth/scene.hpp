#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wcam/data/image.hpp"
#include "wcam/data/manifest.hpp"

namespace wcam::synth {

struct SceneSpec {
  double friction = 0.5;  // [0, 1]
  std::uint64_t seed = 0;
  int width = 1280;
  int height = 720;
  std::string station_id = "syn-00";
  double lighting = 1.0;  // [0, 1]; 0 is the darkest exposure
  int clutter = 6;        // distractor shapes outside the road
  bool mask_road = false; // paint the road a flat grey, removing the friction cue
};

// Per-station camera framing, fixed for a station id.
struct RoadGeometry {
  double horizon;       // road top, fraction of height
  double vanish_x;      // road top centre, fraction of width
  double top_half;      // half-width of the road at the top, fraction of width
  double bottom_left;   // road edges at the bottom row, fractions of width
  double bottom_right;
  std::array<double, 3> sky_top, sky_bottom, terrain;
};

RoadGeometry station_geometry(const std::string& station_id);

struct Scene {
  data::Image image;
  std::vector<std::uint8_t> road_mask;     // 1 inside the road trapezoid
  std::vector<std::uint8_t> clutter_mask;  // 1 where a distractor was drawn
};

// Road texture encodes friction through three redundant cues: mean luminance
// falls, contrast rises, and texture shifts from smooth to fine as friction
// grows. Everything outside the road is drawn from streams that never see the
// friction value.
Scene render_scene(const SceneSpec& spec);

inline data::Image generate_scene(const SceneSpec& spec) { return render_scene(spec).image; }

// Fill the road region with flat grey.
void mask_road(data::Image& image, const std::vector<std::uint8_t>& road_mask);

struct DatasetOptions {
  int width = 640;
  int height = 360;
  bool skewed = false;    // friction concentrated near 1 instead of uniform
  bool mask_road = false;
  int workers = 4;
  data::SplitFractions fractions = data::kDefaultSplitFractions;
  long long resample_target = 0;
};

struct DatasetPlan {
  std::vector<SceneSpec> specs;
  std::vector<data::LabeledSample> samples;
};

// Scene specs and labels without rendering anything.
DatasetPlan plan_dataset(int n, int stations, std::uint64_t seed, const DatasetOptions& options = {});

// Writes images under `dir` and returns the manifest (also written to
// dir/manifest.jsonl). Sample k goes to station k mod stations; its scene
// randomness comes from derive_seed(seed, {k}).
data::DatasetManifest generate_dataset(int n, int stations, std::uint64_t seed, const std::filesystem::path& dir,
                                       const DatasetOptions& options = {});

std::string station_name(int index);

}  // namespace wcam::synth
