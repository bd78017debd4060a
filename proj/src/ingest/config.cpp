#include "wcam/ingest/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "wcam/util/error.hpp"

namespace wcam::ingest {

namespace {

// Ids end up in URL paths and file names.
void check_id(const std::string& id, const char* what) {
  const bool ok = !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
  if (!ok || id == "." || id == "..") throw ConfigError(std::string("invalid ") + what + " '" + id + "'");
}

}  // namespace

void validate_pair(const StationPair& p, double max_separation_km) {
  check_id(p.camera_station_id, "camera station id");
  check_id(p.weather_station_id, "weather station id");
  const std::string where = " for camera station '" + p.camera_station_id + "'";
  if (p.camera_ids.empty() || p.camera_ids.size() > 2) throw ConfigError("expected 1 or 2 cameras" + where);
  for (const auto& id : p.camera_ids) check_id(id, "camera id");
  if (p.camera_ids.size() == 2 && p.camera_ids[0] == p.camera_ids[1]) throw ConfigError("duplicate camera" + where);
  if (p.sensor_count != 1 && p.sensor_count != 2) throw ConfigError("expected 1 or 2 sensors" + where);
  if (!std::isfinite(p.separation_km) || p.separation_km < 0.0 || p.separation_km > max_separation_km)
    throw ConfigError("station separation out of range" + where);
}

std::vector<StationPair> parse_station_pairs(const nlohmann::json& table, double max_separation_km) {
  if (!table.is_array()) throw ConfigError("station pair table must be a JSON array");
  std::vector<StationPair> pairs;
  try {
    for (const auto& row : table) {
      StationPair p;
      p.camera_station_id = row.at("camera_station_id").get<std::string>();
      p.weather_station_id = row.at("weather_station_id").get<std::string>();
      p.camera_ids = row.at("camera_ids").get<std::vector<std::string>>();
      p.sensor_count = row.value("sensor_count", 1);
      p.separation_km = row.value("separation_km", 0.0);
      validate_pair(p, max_separation_km);
      pairs.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("station pair table: ") + e.what());
  }
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      if (pairs[i].camera_station_id == pairs[j].camera_station_id)
        throw ConfigError("camera station '" + pairs[i].camera_station_id + "' listed twice");
      for (const auto& a : pairs[i].camera_ids)
        if (std::find(pairs[j].camera_ids.begin(), pairs[j].camera_ids.end(), a) != pairs[j].camera_ids.end())
          throw ConfigError("camera '" + a + "' belongs to two stations");
    }
  return pairs;
}

std::vector<StationPair> read_station_pairs(const std::filesystem::path& path, double max_separation_km) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open station pair table " + path.string());
  try {
    return parse_station_pairs(nlohmann::json::parse(in), max_separation_km);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json station_pairs_json(const std::vector<StationPair>& pairs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pairs)
    out.push_back({{"camera_station_id", p.camera_station_id},
                   {"weather_station_id", p.weather_station_id},
                   {"camera_ids", p.camera_ids},
                   {"sensor_count", p.sensor_count},
                   {"separation_km", p.separation_km}});
  return out;
}

data::StationPairing station_pairing(const std::vector<StationPair>& pairs) {
  data::StationPairing out;
  for (const auto& p : pairs) out[p.camera_station_id] = p.weather_station_id;
  return out;
}

IngestConfig ingest_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  IngestConfig c;
  try {
    c.client.base_url = j.at("base_url").get<std::string>();
    c.client.token = j.value("token", std::string{});
    c.client.max_concurrency = j.value("max_concurrency", c.client.max_concurrency);
    c.client.min_spacing = std::chrono::milliseconds{j.value("spacing_ms", c.client.min_spacing.count())};
    c.client.attempts = j.value("attempts", c.client.attempts);
    c.client.backoff = std::chrono::milliseconds{j.value("backoff_ms", c.client.backoff.count())};
    c.client.timeout = std::chrono::seconds{j.value("timeout_s", c.client.timeout.count())};
    c.cadence = std::chrono::seconds{j.value("cadence_s", c.cadence.count())};
    c.duration = std::chrono::seconds{j.value("duration_s", c.duration.count())};
    if (j.contains("archive_dir")) c.archive_dir = j.at("archive_dir").get<std::string>();
    c.max_separation_km = j.value("max_separation_km", c.max_separation_km);
    if (j.contains("pairs")) {
      c.pairs = parse_station_pairs(j.at("pairs"), c.max_separation_km);
    } else if (j.contains("pairs_file")) {
      std::filesystem::path file = j.at("pairs_file").get<std::string>();
      if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
      c.pairs = read_station_pairs(file, c.max_separation_km);
    } else {
      throw ConfigError("ingest config needs 'pairs' or 'pairs_file'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ingest config: ") + e.what());
  }
  if (c.client.base_url.rfind("http://", 0) != 0 && c.client.base_url.rfind("https://", 0) != 0)
    throw ConfigError("base_url must start with http:// or https://");
  if (c.client.max_concurrency < 1 || c.client.max_concurrency > 4)
    throw ConfigError("max_concurrency must be in [1, 4]");
  if (c.client.min_spacing < std::chrono::milliseconds{250}) throw ConfigError("spacing_ms must be at least 250");
  if (c.client.attempts < 1) throw ConfigError("attempts must be positive");
  if (c.cadence.count() <= 0) throw ConfigError("cadence_s must be positive");
  if (c.duration.count() < 0) throw ConfigError("duration_s must not be negative");
  return c;
}

}  // namespace wcam::ingest
