#include "wcam/data/manifest.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "wcam/data/image.hpp"
#include "wcam/data/transforms.hpp"
#include "wcam/util/error.hpp"
#include "wcam/util/random.hpp"

namespace wcam::data {

Split DatasetManifest::split_of(const LabeledSample& s) const {
  const auto it = splits.find(s.camera_station_id);
  if (it == splits.end()) throw ValidationError("station '" + s.camera_station_id + "' has no split");
  return it->second;
}

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (split_of(samples[i]) == split) out.push_back(i);
  return out;
}

std::string manifest_text(const DatasetManifest& m) {
  nlohmann::json splits = nlohmann::json::object();
  for (const auto& [station, split] : m.splits) splits[station] = to_string(split);
  nlohmann::json header = {{"format", kManifestFormat},
                           {"version", kManifestVersion},
                           {"seed", m.seed},
                           {"normalization", m.normalization},
                           {"interpolation", m.interpolation},
                           {"splits", splits},
                           {"samples", m.samples.size()},
                           {"info", m.info}};
  std::ostringstream out;
  out << header.dump() << '\n';
  for (const auto& s : m.samples) {
    const nlohmann::json record = {{"image", s.image_ref},
                                   {"camera_station", s.camera_station_id},
                                   {"weather_station", s.weather_station_id},
                                   {"timestamp", format_iso(s.timestamp)},
                                   {"friction_factor", std::round(s.friction_factor * 1e6) / 1e6},
                                   {"split", to_string(m.split_of(s))}};
    out << record.dump() << '\n';
  }
  return out.str();
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  try {
    if (!std::getline(in, line)) throw ValidationError("empty manifest");
    ++line_no;
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != kManifestFormat) throw ValidationError("not a dataset manifest");
    if (header.at("version").get<int>() != kManifestVersion)
      throw ValidationError("unsupported manifest version " + header.at("version").dump());
    m.seed = header.at("seed").get<std::uint64_t>();
    m.normalization = header.at("normalization").get<Normalization>();
    m.interpolation = header.value("interpolation", "bilinear");
    for (const auto& [station, split] : header.at("splits").items()) m.splits[station] = parse_split(split);
    m.info = header.value("info", nlohmann::json::object());
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto r = nlohmann::json::parse(line);
      LabeledSample s{r.at("image").get<std::string>(), r.at("camera_station").get<std::string>(),
                      r.at("weather_station").get<std::string>(), parse_iso(r.at("timestamp").get<std::string>()),
                      r.at("friction_factor").get<double>()};
      const Split tagged = parse_split(r.at("split").get<std::string>());
      if (m.split_of(s) != tagged)
        throw ValidationError("record split '" + to_string(tagged) + "' disagrees with header for station '" +
                              s.camera_station_id + "'");
      m.samples.push_back(std::move(s));
    }
    if (header.contains("samples") && header.at("samples").get<std::size_t>() != m.samples.size())
      throw ValidationError("manifest header announces " + header.at("samples").dump() + " samples, found " +
                            std::to_string(m.samples.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << manifest_text(manifest);
  if (!out) throw IoError("failed writing manifest " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_manifest(text.str(), path.parent_path());
}

bool manifest_has_no_leakage(const DatasetManifest& manifest) {
  StationSets sets;
  for (const auto& s : manifest.samples)
    sets[static_cast<std::size_t>(manifest.split_of(s))].insert(s.camera_station_id);
  return pairwise_disjoint(sets);
}

Normalization compute_normalization(const DatasetManifest& manifest, int workers) {
  const auto train = manifest.indices(Split::train);
  if (train.empty()) throw ConfigError("train split is empty; cannot compute normalization statistics");
  workers = std::max(1, std::min<int>(workers, static_cast<int>(train.size())));
  // Per-image partial sums are merged in index order so the result does not
  // depend on the worker count.
  std::vector<NormalizationAccumulator> partial(train.size());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = static_cast<std::size_t>(w); k < train.size(); k += static_cast<std::size_t>(workers)) {
            const auto& s = manifest.samples[train[k]];
            partial[k].add(resize_for_model(read_image(manifest.image_path(s))));
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  NormalizationAccumulator total;
  for (const auto& p : partial) total.merge(p);
  return total.result();
}

DatasetManifest build_manifest(const std::vector<LabeledSample>& samples, const std::filesystem::path& root,
                               const BuildOptions& options) {
  DatasetManifest m;
  m.seed = options.seed;
  m.root = root;
  const auto before = friction_histogram(samples, options.bins);
  m.samples = options.resample_target > 0
                  ? weighted_resample(samples, options.bins, options.resample_target, derive_seed(options.seed, {1}))
                  : samples;
  m.splits = split_by_station(m.samples, options.fractions, derive_seed(options.seed, {2}));
  m.normalization = compute_normalization(m, options.workers);
  m.info = {{"bins", options.bins},
            {"input_samples", samples.size()},
            {"histogram_before", before},
            {"histogram_after", friction_histogram(m.samples, options.bins)},
            {"split_fractions", split_fractions(m.samples, m.splits)}};
  return m;
}

}  // namespace wcam::data
