#include "wcam/ingest/collector.hpp"

#include <atomic>
#include <thread>

#include "wcam/data/image.hpp"
#include "wcam/data/labels.hpp"
#include "wcam/util/error.hpp"

namespace wcam::ingest {

namespace {

constexpr const char* kCancelled = "cancelled";

ArchiveRecord skip_record(const std::string& station, const std::string& source, Timestamp tick,
                          const FetchResult& f, std::string reason) {
  ArchiveRecord r;
  r.kind = RecordKind::skip;
  r.station_id = station;
  r.source_id = source;
  r.timestamp = tick;
  r.path = f.path;
  r.status = f.status;
  r.attempts = f.attempts;
  r.latency_ms = f.latency_ms;
  r.reason = std::move(reason);
  return r;
}

std::string failure_reason(const FetchResult& f) {
  if (f.cancelled) return kCancelled;
  if (f.status == 0) return "transport: " + f.error;
  return "http " + std::to_string(f.status);
}

}  // namespace

ArchiveRecord poll_camera(RoadDataClient& client, const StationPair& pair, const std::string& camera_id,
                          Timestamp tick, std::stop_token stop) {
  auto f = client.camera_image(camera_id, stop);
  if (!f.ok() || f.cancelled) return skip_record(pair.camera_station_id, camera_id, tick, f, failure_reason(f));
  const auto format = data::sniff_format(data::byte_span(f.body));
  if (format == data::ImageFormat::unknown)
    return skip_record(pair.camera_station_id, camera_id, tick, f, "validation: payload is not an image");

  ArchiveRecord r;
  r.kind = RecordKind::image;
  r.station_id = pair.camera_station_id;
  r.source_id = camera_id;
  r.timestamp = tick;
  r.extension = format == data::ImageFormat::png ? "png" : "jpg";
  r.path = f.path;
  r.status = f.status;
  r.attempts = f.attempts;
  r.latency_ms = f.latency_ms;
  r.payload = std::move(f.body);
  return r;
}

std::vector<ArchiveRecord> parse_sensor_payload(const std::string& body, const std::string& weather_station_id,
                                                Timestamp tick) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed sensor payload: ") + e.what());
  }
  if (!j.is_object() || !j.contains("sensors") || !j["sensors"].is_array())
    throw ValidationError("sensor payload has no sensor list");
  if (j["sensors"].empty()) throw ValidationError("sensor payload lists no sensors");
  if (j.contains("station_id") && j["station_id"] != weather_station_id)
    throw ValidationError("sensor payload is for station " + j["station_id"].dump());
  Timestamp when = tick;
  if (j.contains("timestamp")) {
    if (!j["timestamp"].is_string()) throw ValidationError("sensor payload timestamp is not a string");
    try {
      when = parse_iso(j["timestamp"].get<std::string>());
    } catch (const ArgumentError& e) {
      throw ValidationError(e.what());
    }
  }

  std::vector<ArchiveRecord> out;
  int position = 0;
  for (const auto& s : j["sensors"]) {
    ++position;
    ArchiveRecord r;
    r.kind = RecordKind::reading;
    r.station_id = weather_station_id;
    r.timestamp = when;
    r.sensor_index = position;
    if (s.is_object() && s.contains("index") && s["index"].is_number_integer()) r.sensor_index = s["index"].get<int>();
    if (s.is_object() && s.contains("grip") && s["grip"].is_number()) {
      const double g = s["grip"].get<double>();
      r.grip = g;
      r.out_of_range = g < data::kGripMin || g > data::kGripMax;
    } else {
      r.warning = "sensor " + std::to_string(r.sensor_index) + " has no grip value";
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ArchiveRecord> poll_weather(RoadDataClient& client, const std::string& weather_station_id, Timestamp tick,
                                        std::stop_token stop) {
  const auto f = client.station_sensors(weather_station_id, stop);
  if (!f.ok() || f.cancelled) return {skip_record(weather_station_id, weather_station_id, tick, f, failure_reason(f))};
  std::vector<ArchiveRecord> out;
  try {
    out = parse_sensor_payload(f.body, weather_station_id, tick);
  } catch (const ValidationError& e) {
    return {skip_record(weather_station_id, weather_station_id, tick, f, std::string("validation: ") + e.what())};
  }
  for (auto& r : out) {
    r.path = f.path;
    r.status = f.status;
    r.attempts = f.attempts;
    r.latency_ms = f.latency_ms;
  }
  return out;
}

nlohmann::json CollectionSummary::to_json() const {
  return {{"ticks", ticks},
          {"image_records", image_records},
          {"reading_records", reading_records},
          {"partial_readings", partial_readings},
          {"out_of_range", out_of_range},
          {"skips", skips},
          {"bytes", bytes},
          {"cancelled", cancelled}};
}

CollectionSummary run_collection(const std::vector<StationPair>& pairs, std::chrono::seconds duration,
                                 std::chrono::seconds cadence, RoadDataClient& client, ArchiveWriter& writer,
                                 std::stop_token stop) {
  if (cadence.count() <= 0) throw ArgumentError("cadence must be positive");

  struct Task {
    const StationPair* pair;
    std::string camera_id;  // empty for a weather poll
  };
  std::vector<Task> tasks;
  std::vector<std::string> weather_seen;
  for (const auto& p : pairs) {
    for (const auto& cam : p.camera_ids) tasks.push_back({&p, cam});
    if (std::find(weather_seen.begin(), weather_seen.end(), p.weather_station_id) == weather_seen.end()) {
      weather_seen.push_back(p.weather_station_id);
      tasks.push_back({&p, {}});
    }
  }

  CollectionSummary summary;
  const auto start = std::chrono::floor<std::chrono::seconds>(client.clock().now());
  const std::size_t bytes_before = writer.bytes_written();
  for (long long k = 0; k * cadence.count() < duration.count(); ++k) {
    const Timestamp tick = start + k * cadence;
    if (!client.clock().sleep_until(tick, stop)) {
      summary.cancelled = true;
      break;
    }
    ++summary.ticks;

    std::vector<std::vector<ArchiveRecord>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    {
      const int workers = std::max(1, std::min<int>(client.config().max_concurrency, static_cast<int>(tasks.size())));
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
            if (stop.stop_requested()) return;
            const auto& t = tasks[i];
            try {
              if (!t.camera_id.empty())
                results[i].push_back(poll_camera(client, *t.pair, t.camera_id, tick, stop));
              else
                results[i] = poll_weather(client, t.pair->weather_station_id, tick, stop);
            } catch (const std::exception& e) {
              const auto& id = t.camera_id.empty() ? t.pair->weather_station_id : t.camera_id;
              FetchResult none;
              results[i] = {skip_record(t.camera_id.empty() ? id : t.pair->camera_station_id, id, tick, none,
                                        std::string("error: ") + e.what())};
            }
          }
        });
    }

    for (auto& records : results) {
      if (records.empty() || records.front().reason == kCancelled) continue;
      writer.log_fetch(records.front());
      for (auto& r : records) {
        writer.append(r);
        switch (r.kind) {
          case RecordKind::image: ++summary.image_records; break;
          case RecordKind::reading:
            ++summary.reading_records;
            if (!r.grip) ++summary.partial_readings;
            if (r.out_of_range) ++summary.out_of_range;
            break;
          case RecordKind::skip: ++summary.skips; break;
        }
      }
    }
    writer.flush();
    if (stop.stop_requested()) {
      summary.cancelled = true;
      break;
    }
  }
  summary.bytes = writer.bytes_written() - bytes_before;
  return summary;
}

CollectionSummary run_collection(const IngestConfig& config, Clock& clock, std::stop_token stop) {
  ArchiveWriter writer(config.archive_dir);
  RoadDataClient client(config.client, clock);
  return run_collection(config.pairs, config.duration, config.cadence, client, writer, stop);
}

}  // namespace wcam::ingest
