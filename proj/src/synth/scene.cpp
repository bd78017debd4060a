#include "wcam/synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "wcam/util/error.hpp"
#include "wcam/util/hash.hpp"
#include "wcam/util/random.hpp"

namespace wcam::synth {

namespace {

// Stream tags for derive_seed; the friction value never enters a seed.
constexpr std::uint64_t kTextureStream = 0x7e7;
constexpr std::uint64_t kBackgroundStream = 0xb6;
constexpr std::uint64_t kClutterStream = 0xc1;

// Smooth noise in [-1, 1]: random lattice values every `cell` pixels,
// bilinearly interpolated.
class ValueNoise {
 public:
  ValueNoise(int width, int height, int cell, Rng& rng)
      : cell_(cell), cols_(width / cell + 2), rows_(height / cell + 2), lattice_(static_cast<std::size_t>(cols_ * rows_)) {
    for (auto& v : lattice_) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }

  float operator()(int x, int y) const {
    const float fx = static_cast<float>(x) / cell_, fy = static_cast<float>(y) / cell_;
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const float tx = fx - x0, ty = fy - y0;
    const float a = at(x0, y0) * (1 - tx) + at(x0 + 1, y0) * tx;
    const float b = at(x0, y0 + 1) * (1 - tx) + at(x0 + 1, y0 + 1) * tx;
    return a * (1 - ty) + b * ty;
  }

 private:
  float at(int x, int y) const { return lattice_[static_cast<std::size_t>(y * cols_ + x)]; }

  int cell_, cols_, rows_;
  std::vector<float> lattice_;
};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

RoadGeometry station_geometry(const std::string& station_id) {
  Rng rng(fnv1a(station_id));
  RoadGeometry g;
  g.horizon = rng.uniform(0.38, 0.52);
  g.vanish_x = rng.uniform(0.38, 0.62);
  g.top_half = rng.uniform(0.02, 0.05);
  g.bottom_left = rng.uniform(0.02, 0.22);
  g.bottom_right = rng.uniform(0.78, 0.98);
  const double hue = rng.uniform(-0.08, 0.08);
  g.sky_top = {0.35 + hue, 0.5 + hue / 2, 0.8};
  g.sky_bottom = {0.75, 0.8 + hue / 2, 0.88 - hue};
  g.terrain = {rng.uniform(0.25, 0.45), rng.uniform(0.3, 0.5), rng.uniform(0.15, 0.3)};
  return g;
}

Scene render_scene(const SceneSpec& spec) {
  if (spec.width < 16 || spec.height < 16) throw ArgumentError("scene must be at least 16x16");
  const double f = std::clamp(spec.friction, 0.0, 1.0);
  const int W = spec.width, H = spec.height;
  const auto geo = station_geometry(spec.station_id);
  const auto npx = static_cast<std::size_t>(W) * H;

  Scene scene;
  scene.image = data::Image(W, H);
  scene.road_mask.assign(npx, 0);
  scene.clutter_mask.assign(npx, 0);

  Rng bg_rng(derive_seed(spec.seed, {kBackgroundStream}));
  const ValueNoise terrain_noise(W, H, std::max(4, W / 40), bg_rng);
  const ValueNoise sky_noise(W, H, std::max(8, W / 10), bg_rng);
  const double exposure = 0.7 + 0.3 * std::clamp(spec.lighting, 0.0, 1.0);

  Rng tex_rng(derive_seed(spec.seed, {kTextureStream}));
  const ValueNoise coarse(W, H, std::max(4, W / 50), tex_rng);
  std::vector<float> fine(npx);
  for (auto& v : fine) v = static_cast<float>(tex_rng.uniform(-1.0, 1.0));

  const double luminance = 0.85 - 0.6 * f;
  const double amplitude = 0.02 + 0.18 * f;
  const int road_top = static_cast<int>(geo.horizon * H);

  for (int y = 0; y < H; ++y) {
    // road edges interpolate linearly from the top row to the bottom row
    const double t = road_top >= H - 1 ? 1.0 : static_cast<double>(y - road_top) / (H - 1 - road_top);
    const double left = (geo.vanish_x - geo.top_half) * (1 - t) + geo.bottom_left * t;
    const double right = (geo.vanish_x + geo.top_half) * (1 - t) + geo.bottom_right * t;
    for (int x = 0; x < W; ++x) {
      const auto idx = static_cast<std::size_t>(y) * W + x;
      const double u = (x + 0.5) / W;
      std::array<double, 3> rgb;
      if (y >= road_top && u >= left && u <= right) {
        scene.road_mask[idx] = 1;
        const double texture = f * fine[idx] + (1 - f) * coarse(x, y);
        const double v = spec.mask_road ? 0.5 : luminance + amplitude * texture;
        rgb = {v, v, v * 1.02};
      } else if (y < road_top) {
        const double s = static_cast<double>(y) / std::max(1, road_top);
        const double n = 0.03 * sky_noise(x, y);
        for (int c = 0; c < 3; ++c) rgb[c] = geo.sky_top[c] * (1 - s) + geo.sky_bottom[c] * s + n;
      } else {
        const double n = 0.12 * terrain_noise(x, y);
        for (int c = 0; c < 3; ++c) rgb[c] = geo.terrain[c] + n;
      }
      for (int c = 0; c < 3; ++c) scene.image.pixels[idx * 3 + c] = to_byte(rgb[c] * exposure);
    }
  }

  Rng clutter_rng(derive_seed(spec.seed, {kClutterStream}));
  for (int k = 0; k < spec.clutter; ++k) {
    const bool pole = clutter_rng.bernoulli(0.5);
    const int cx = static_cast<int>(clutter_rng.uniform(0, W));
    const int cy = static_cast<int>(clutter_rng.uniform(H * 0.2, H));
    const int hw = pole ? std::max(1, W / 200) : static_cast<int>(clutter_rng.uniform(W * 0.01, W * 0.04));
    const int hh = pole ? static_cast<int>(clutter_rng.uniform(H * 0.05, H * 0.2)) : hw;
    const std::array<double, 3> color{clutter_rng.uniform(), clutter_rng.uniform(), clutter_rng.uniform()};
    for (int y = std::max(0, cy - hh); y < std::min(H, cy + hh); ++y)
      for (int x = std::max(0, cx - hw); x < std::min(W, cx + hw); ++x) {
        const auto idx = static_cast<std::size_t>(y) * W + x;
        if (scene.road_mask[idx]) continue;
        if (!pole && (x - cx) * (x - cx) + (y - cy) * (y - cy) > hw * hw) continue;
        scene.clutter_mask[idx] = 1;
        for (int c = 0; c < 3; ++c) scene.image.pixels[idx * 3 + c] = to_byte(color[c] * exposure);
      }
  }
  return scene;
}

void mask_road(data::Image& image, const std::vector<std::uint8_t>& road_mask) {
  if (road_mask.size() * 3 != image.pixels.size()) throw ShapeError("road mask does not match the image");
  for (std::size_t i = 0; i < road_mask.size(); ++i)
    if (road_mask[i])
      for (int c = 0; c < 3; ++c) image.pixels[i * 3 + c] = 128;
}

std::string station_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "syn-%02d", index);
  return buf;
}

DatasetPlan plan_dataset(int n, int stations, std::uint64_t seed, const DatasetOptions& options) {
  if (stations < 1 || n < stations) throw ArgumentError("generate_dataset needs n >= stations >= 1");
  DatasetPlan plan;
  const auto base = make_timestamp(2023, 1, 1);
  for (int k = 0; k < n; ++k) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    const double u = rng.uniform();
    SceneSpec spec;
    spec.friction = options.skewed ? 1.0 - u * u * u : u;
    spec.seed = derive_seed(seed, {static_cast<std::uint64_t>(k), 1});
    spec.width = options.width;
    spec.height = options.height;
    spec.station_id = station_name(k % stations);
    spec.lighting = rng.uniform();
    spec.clutter = static_cast<int>(rng.integer(2, 8));
    spec.mask_road = options.mask_road;
    char name[48];
    std::snprintf(name, sizeof name, "images/%s/%05d.png", spec.station_id.c_str(), k);
    plan.samples.push_back({name, spec.station_id, "ws-" + spec.station_id.substr(4), base + std::chrono::minutes{20 * k},
                            spec.friction});
    plan.specs.push_back(std::move(spec));
  }
  return plan;
}

data::DatasetManifest generate_dataset(int n, int stations, std::uint64_t seed, const std::filesystem::path& dir,
                                       const DatasetOptions& options) {
  const auto plan = plan_dataset(n, stations, seed, options);
  const auto& samples = plan.samples;
  const auto& specs = plan.specs;
  std::filesystem::create_directories(dir / "images");

  const int workers = std::max(1, std::min(options.workers, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int k = w; k < n; k += workers)
            data::write_png(dir / samples[static_cast<std::size_t>(k)].image_ref,
                            generate_scene(specs[static_cast<std::size_t>(k)]));
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  data::BuildOptions build;
  build.seed = seed;
  build.fractions = options.fractions;
  build.resample_target = options.resample_target;
  build.workers = options.workers;
  auto manifest = data::build_manifest(samples, dir, build);
  manifest.info["generator"] = {{"n", n},
                                {"stations", stations},
                                {"width", options.width},
                                {"height", options.height},
                                {"skewed", options.skewed},
                                {"mask_road", options.mask_road}};
  data::write_manifest(dir / "manifest.jsonl", manifest);
  return manifest;
}

}  // namespace wcam::synth
