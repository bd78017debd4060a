#pragma once

#include <chrono>
#include <stop_token>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/ingest/archive.hpp"
#include "wcam/ingest/client.hpp"
#include "wcam/ingest/config.hpp"

namespace wcam::ingest {

// One image record, or a skip record when the fetch failed or the payload was
// not an image.
ArchiveRecord poll_camera(RoadDataClient& client, const StationPair& pair, const std::string& camera_id,
                          Timestamp tick, std::stop_token stop = {});

// One reading per sensor in the payload, or a single skip record.
std::vector<ArchiveRecord> poll_weather(RoadDataClient& client, const std::string& weather_station_id,
                                        Timestamp tick, std::stop_token stop = {});

// Parses a sensors payload; throws ValidationError on malformed JSON or a
// missing sensor list.
std::vector<ArchiveRecord> parse_sensor_payload(const std::string& body, const std::string& weather_station_id,
                                                Timestamp tick);

struct CollectionSummary {
  int ticks = 0;
  std::size_t image_records = 0;
  std::size_t reading_records = 0;
  std::size_t partial_readings = 0;
  std::size_t out_of_range = 0;
  std::size_t skips = 0;
  std::size_t bytes = 0;
  bool cancelled = false;

  nlohmann::json to_json() const;
};

// Polls every camera and weather station at start + k * cadence for all k with
// k * cadence < duration. Polls within a tick run concurrently; their records
// are written in table order once the tick completes. Cancellation stops new
// polls and flushes whatever finished.
CollectionSummary run_collection(const std::vector<StationPair>& pairs, std::chrono::seconds duration,
                                 std::chrono::seconds cadence, RoadDataClient& client, ArchiveWriter& writer,
                                 std::stop_token stop = {});

CollectionSummary run_collection(const IngestConfig& config, Clock& clock, std::stop_token stop = {});

}  // namespace wcam::ingest
