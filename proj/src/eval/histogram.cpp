#include "wcam/eval/histogram.hpp"

#include <fstream>

#include "wcam/data/sampling.hpp"
#include "wcam/eval/render.hpp"
#include "wcam/util/error.hpp"

namespace wcam::eval {

void to_json(nlohmann::json& j, const FrictionHistograms& h) {
  std::size_t before = 0, after = 0;
  for (auto c : h.before) before += c;
  for (auto c : h.after) after += c;
  j = {{"bins", h.bins},
       {"edges", h.edges},
       {"before", h.before},
       {"after", h.after},
       {"samples_before", before},
       {"samples_after", after},
       {"from_build", h.from_build}};
}

FrictionHistograms friction_histograms(const data::DatasetManifest& manifest, const HistogramOptions& options) {
  if (manifest.samples.empty()) throw ArgumentError("manifest has no samples");
  if (options.bins < 1) throw ArgumentError("bins must be positive");
  FrictionHistograms h;
  h.bins = options.bins;
  for (int b = 0; b <= options.bins; ++b) h.edges.push_back(static_cast<double>(b) / options.bins);

  const auto& info = manifest.info;
  const bool resampled = info.contains("histogram_before") && info.value("bins", 0) == options.bins &&
                         info.value("input_samples", std::size_t{0}) != manifest.samples.size();
  if (resampled) {
    h.before = info.at("histogram_before").get<std::vector<std::size_t>>();
    h.after = data::friction_histogram(manifest.samples, options.bins);
    h.from_build = true;
    return h;
  }
  h.before = data::friction_histogram(manifest.samples, options.bins);
  const auto target = options.resample_target > 0 ? options.resample_target
                                                  : static_cast<long long>(manifest.samples.size() / 2);
  h.after = data::friction_histogram(
      data::weighted_resample(manifest.samples, options.bins, std::max<long long>(target, 1), options.seed),
      options.bins);
  return h;
}

FrictionHistograms plot_histograms(const data::DatasetManifest& manifest, const std::filesystem::path& dir,
                                   const HistogramOptions& options) {
  const auto h = friction_histograms(manifest, options);
  std::filesystem::create_directories(dir);
  std::vector<std::string> labels;
  BarSeries before{"before resampling", {}}, after{"after resampling", {}};
  for (int b = 0; b < h.bins; ++b) {
    labels.push_back(format_number(h.edges[b], 2) + "-" + format_number(h.edges[b + 1], 2));
    before.values.push_back(static_cast<double>(h.before[b]));
    after.values.push_back(static_cast<double>(h.after[b]));
  }
  data::write_png(dir / "friction_histogram.png", bar_chart("Friction factor distribution", labels, {before, after}));
  std::ofstream out(dir / "friction_histogram.json");
  out << nlohmann::json(h).dump(2) << '\n';
  if (!out) throw IoError("cannot write " + (dir / "friction_histogram.json").string());
  return h;
}

}  // namespace wcam::eval
