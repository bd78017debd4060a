#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/data/labels.hpp"

namespace wcam::ingest {

inline constexpr double kDefaultMaxSeparationKm = 1.5;

struct StationPair {
  std::string camera_station_id;
  std::string weather_station_id;
  std::vector<std::string> camera_ids;  // 1 or 2
  int sensor_count = 1;                 // 1 or 2
  double separation_km = 0.0;
};

// Throws ConfigError when a pair breaks the table rules.
void validate_pair(const StationPair& pair, double max_separation_km = kDefaultMaxSeparationKm);

// The table is a JSON array of objects with the StationPair field names.
std::vector<StationPair> parse_station_pairs(const nlohmann::json& table,
                                             double max_separation_km = kDefaultMaxSeparationKm);
std::vector<StationPair> read_station_pairs(const std::filesystem::path& path,
                                            double max_separation_km = kDefaultMaxSeparationKm);
nlohmann::json station_pairs_json(const std::vector<StationPair>& pairs);

data::StationPairing station_pairing(const std::vector<StationPair>& pairs);

struct ClientConfig {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string token;     // sent as a bearer token when non-empty
  int max_concurrency = 4;
  std::chrono::milliseconds min_spacing{250};
  int attempts = 3;
  std::chrono::milliseconds backoff{500};  // doubled after each failed attempt
  std::chrono::seconds timeout{20};
};

struct IngestConfig {
  ClientConfig client;
  std::vector<StationPair> pairs;
  std::chrono::seconds cadence{20 * 60};
  std::chrono::seconds duration{60 * 60};
  std::filesystem::path archive_dir = "archive";
  double max_separation_km = kDefaultMaxSeparationKm;
};

// Keys: base_url, token, pairs (inline table) or pairs_file, cadence_s,
// duration_s, archive_dir, max_separation_km, max_concurrency, spacing_ms,
// attempts, backoff_ms, timeout_s. Relative pairs_file paths resolve against
// `base_dir`.
IngestConfig ingest_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

}  // namespace wcam::ingest
