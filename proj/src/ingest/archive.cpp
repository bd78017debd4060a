#include "wcam/ingest/archive.hpp"

#include <algorithm>
#include <regex>

#include "wcam/data/image.hpp"
#include "wcam/util/error.hpp"

namespace wcam::ingest {

std::string to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::image: return "image";
    case RecordKind::reading: return "reading";
    case RecordKind::skip: return "skip";
  }
  return "?";
}

nlohmann::ordered_json record_json(const ArchiveRecord& r) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(r.kind);
  switch (r.kind) {
    case RecordKind::image:
      j["camera_station_id"] = r.station_id;
      j["camera_id"] = r.source_id;
      j["timestamp"] = format_iso(r.timestamp);
      j["image"] = r.image_ref;
      j["bytes"] = r.payload.size();
      break;
    case RecordKind::reading:
      j["weather_station_id"] = r.station_id;
      j["sensor_index"] = r.sensor_index;
      j["timestamp"] = format_iso(r.timestamp);
      j["grip"] = r.grip ? nlohmann::ordered_json(*r.grip) : nlohmann::ordered_json(nullptr);
      j["out_of_range"] = r.out_of_range;
      if (!r.warning.empty()) j["warning"] = r.warning;
      break;
    case RecordKind::skip:
      j["station_id"] = r.station_id;
      j["source_id"] = r.source_id;
      j["timestamp"] = format_iso(r.timestamp);
      j["path"] = r.path;
      j["reason"] = r.reason;
      break;
  }
  j["status"] = r.status;
  j["attempts"] = r.attempts;
  return j;
}

ArchiveRecord record_from_json(const nlohmann::json& j) {
  ArchiveRecord r;
  try {
    const auto kind = j.at("kind").get<std::string>();
    r.timestamp = parse_iso(j.at("timestamp").get<std::string>());
    r.status = j.value("status", 0);
    r.attempts = j.value("attempts", 0);
    if (kind == "image") {
      r.kind = RecordKind::image;
      r.station_id = j.at("camera_station_id").get<std::string>();
      r.source_id = j.at("camera_id").get<std::string>();
      r.image_ref = j.at("image").get<std::string>();
    } else if (kind == "reading") {
      r.kind = RecordKind::reading;
      r.station_id = j.at("weather_station_id").get<std::string>();
      r.sensor_index = j.at("sensor_index").get<int>();
      if (!j.at("grip").is_null()) r.grip = j.at("grip").get<double>();
      r.out_of_range = j.value("out_of_range", false);
      r.warning = j.value("warning", std::string{});
    } else if (kind == "skip") {
      r.kind = RecordKind::skip;
      r.station_id = j.at("station_id").get<std::string>();
      r.source_id = j.at("source_id").get<std::string>();
      r.path = j.value("path", std::string{});
      r.reason = j.value("reason", std::string{});
    } else {
      throw ValidationError("unknown archive record kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("archive record: ") + e.what());
  }
  return r;
}

ArchiveWriter::ArchiveWriter(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec || !std::filesystem::is_directory(root_))
    throw IoError("archive directory " + root_.string() + " cannot be created");
  const auto probe = root_ / ".write-probe";
  {
    std::ofstream out(probe);
    if (!(out << 'x')) throw IoError("archive directory " + root_.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

std::ofstream& ArchiveWriter::stream(const std::string& date, const char* name) {
  if (date != open_date_) {
    records_.close();
    fetch_.close();
    std::filesystem::create_directories(root_ / date);
    records_.open(root_ / date / "records.jsonl", std::ios::app | std::ios::binary);
    fetch_.open(root_ / date / "fetch.jsonl", std::ios::app | std::ios::binary);
    if (!records_ || !fetch_) throw IoError("cannot open archive logs under " + (root_ / date).string());
    open_date_ = date;
  }
  return std::string_view(name) == "records" ? records_ : fetch_;
}

void ArchiveWriter::append(ArchiveRecord& r) {
  std::lock_guard lock(mutex_);
  const auto date = format_date(r.timestamp);
  if (r.kind == RecordKind::image) {
    const auto dir = std::filesystem::path(date) / "images" / r.source_id;
    std::filesystem::create_directories(root_ / dir);
    const auto stem = format_compact(r.timestamp);
    auto rel = dir / (stem + "." + r.extension);
    for (int n = 1; std::filesystem::exists(root_ / rel); ++n)
      rel = dir / (stem + "-" + std::to_string(n) + "." + r.extension);
    data::write_file(root_ / rel, data::byte_span(r.payload));
    r.image_ref = rel.generic_string();
    bytes_ += r.payload.size();
  }
  auto& out = stream(date, "records");
  out << record_json(r).dump() << '\n';
  if (!out) throw IoError("write failed under " + root_.string());
}

void ArchiveWriter::log_fetch(const ArchiveRecord& r) {
  std::lock_guard lock(mutex_);
  nlohmann::ordered_json f;
  f["path"] = r.path;
  f["timestamp"] = format_iso(r.timestamp);
  f["status"] = r.status;
  f["attempts"] = r.attempts;
  f["latency_ms"] = r.latency_ms;
  auto& out = stream(format_date(r.timestamp), "fetch");
  out << f.dump() << '\n';
  if (!out) throw IoError("write failed under " + root_.string());
}

void ArchiveWriter::flush() {
  std::lock_guard lock(mutex_);
  records_.flush();
  fetch_.flush();
}

std::vector<ArchiveRecord> read_archive(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw IoError("archive " + root.string() + " does not exist");
  static const std::regex date_dir(R"(\d{4}-\d{2}-\d{2})");
  std::vector<std::filesystem::path> days;
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_directory() && std::regex_match(e.path().filename().string(), date_dir)) days.push_back(e.path());
  std::sort(days.begin(), days.end());

  std::vector<ArchiveRecord> out;
  for (const auto& day : days) {
    std::ifstream in(day / "records.jsonl");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        out.push_back(record_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError((day / "records.jsonl").string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return out;
}

ArchiveObservations archive_observations(const std::vector<ArchiveRecord>& records) {
  ArchiveObservations obs;
  for (const auto& r : records) {
    switch (r.kind) {
      case RecordKind::image: obs.images.push_back({r.image_ref, r.station_id, r.timestamp}); break;
      case RecordKind::reading:
        if (r.grip)
          obs.readings.push_back({r.station_id, r.timestamp, *r.grip, r.sensor_index});
        else
          ++obs.partial_readings;
        break;
      case RecordKind::skip: ++obs.skips; break;
    }
  }
  return obs;
}

data::PairingResult label_archive(const std::filesystem::path& root, const std::vector<StationPair>& pairs,
                                  std::chrono::seconds tolerance) {
  const auto obs = archive_observations(read_archive(root));
  return data::pair_and_label(obs.images, obs.readings, station_pairing(pairs), tolerance);
}

}  // namespace wcam::ingest
