#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/data/labels.hpp"
#include "wcam/ingest/config.hpp"
#include "wcam/util/time.hpp"

namespace wcam::ingest {

enum class RecordKind { image, reading, skip };

std::string to_string(RecordKind kind);

struct ArchiveRecord {
  RecordKind kind = RecordKind::image;
  std::string station_id;  // camera station for images, weather station for readings and sensor skips
  std::string source_id;   // camera id, or the polled id of a skip
  Timestamp timestamp;

  // image
  std::string image_ref;  // relative to the archive root, set by the writer
  std::string payload;    // image bytes; never serialized
  std::string extension;  // "jpg" or "png"

  // reading
  int sensor_index = 0;
  std::optional<double> grip;  // raw value; empty for a partial record
  bool out_of_range = false;
  std::string warning;

  // fetch metadata
  std::string path;
  int status = 0;
  int attempts = 0;
  std::string reason;  // skips only
  double latency_ms = 0.0;
};

// The line stored in records.jsonl. Latency is excluded so replays are
// byte-stable; it goes to fetch.jsonl instead.
nlohmann::ordered_json record_json(const ArchiveRecord& r);
ArchiveRecord record_from_json(const nlohmann::json& j);

// Append-only archive:
//   <root>/<YYYY-MM-DD>/records.jsonl
//   <root>/<YYYY-MM-DD>/fetch.jsonl
//   <root>/<YYYY-MM-DD>/images/<camera_id>/<YYYYMMDDTHHMMSSZ>.<ext>
// Existing files are never rewritten; an image whose name is taken gets a
// numeric suffix.
class ArchiveWriter {
 public:
  // Creates the root and checks it accepts writes; throws IoError otherwise.
  explicit ArchiveWriter(std::filesystem::path root);

  // Thread-safe. Fills in image_ref for image records.
  void append(ArchiveRecord& record);
  // One fetch.jsonl line from the fetch metadata of `record`.
  void log_fetch(const ArchiveRecord& record);
  void flush();

  const std::filesystem::path& root() const { return root_; }
  std::size_t bytes_written() const { return bytes_; }

 private:
  std::ofstream& stream(const std::string& date, const char* name);

  std::filesystem::path root_;
  std::mutex mutex_;
  std::string open_date_;
  std::ofstream records_, fetch_;
  std::size_t bytes_ = 0;
};

// All records under `root`, date directories in order, file order within.
std::vector<ArchiveRecord> read_archive(const std::filesystem::path& root);

struct ArchiveObservations {
  std::vector<data::ImageObservation> images;
  std::vector<data::GripReading> readings;
  std::size_t partial_readings = 0;
  std::size_t skips = 0;
};

ArchiveObservations archive_observations(const std::vector<ArchiveRecord>& records);

// Archive -> labelled samples, image refs relative to `root`.
data::PairingResult label_archive(const std::filesystem::path& root, const std::vector<StationPair>& pairs,
                                  std::chrono::seconds tolerance = data::kAlignmentTolerance);

}  // namespace wcam::ingest
