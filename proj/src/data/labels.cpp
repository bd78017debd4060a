#include "wcam/data/labels.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "wcam/util/error.hpp"

namespace wcam::data {

double clamp_grip(double grip) {
  if (!std::isfinite(grip)) throw ArgumentError("grip value is not finite");
  return std::clamp(grip, kGripMin, kGripMax);
}

double grip_to_friction(double grip) { return (clamp_grip(grip) - kGripMin) / (kGripMax - kGripMin); }

double friction_to_grip(double friction) {
  if (!std::isfinite(friction)) throw ArgumentError("friction value is not finite");
  return kGripMin + std::clamp(friction, 0.0, 1.0) * (kGripMax - kGripMin);
}

double aggregate_readings(const std::vector<GripReading>& readings) {
  if (readings.empty()) throw MissingDataError("no grip readings to aggregate");
  double sum = 0.0;
  for (const auto& r : readings) {
    if (r.station_id != readings.front().station_id || r.timestamp != readings.front().timestamp)
      throw ArgumentError("aggregate_readings: readings from different stations or times");
    sum += r.grip;
  }
  return sum / static_cast<double>(readings.size());
}

PairingResult pair_and_label(const std::vector<ImageObservation>& images, const std::vector<GripReading>& readings,
                             const StationPairing& pairing, std::chrono::seconds tolerance) {
  PairingResult result;

  std::map<std::pair<std::string, Timestamp>, std::vector<GripReading>> groups;
  for (const auto& r : readings) {
    GripReading clamped = r;
    clamped.grip = clamp_grip(r.grip);
    if (clamped.grip != r.grip) ++result.clamped_readings;
    groups[{r.station_id, r.timestamp}].push_back(clamped);
  }
  // station -> time-ordered (timestamp, aggregated grip)
  std::map<std::string, std::vector<std::pair<Timestamp, double>>> series;
  for (const auto& [key, group] : groups) series[key.first].emplace_back(key.second, aggregate_readings(group));

  for (const auto& image : images) {
    const auto pair = pairing.find(image.camera_station_id);
    if (pair == pairing.end())
      throw ConfigError("camera station '" + image.camera_station_id + "' is not in the station pairing table");
    const auto found = series.find(pair->second);
    if (found == series.end()) {
      ++result.dropped;
      continue;
    }
    const auto& s = found->second;
    auto it = std::lower_bound(s.begin(), s.end(), image.timestamp,
                               [](const auto& entry, Timestamp t) { return entry.first < t; });
    const std::pair<Timestamp, double>* best = nullptr;
    auto consider = [&](decltype(it) c) {
      const auto d = c->first > image.timestamp ? c->first - image.timestamp : image.timestamp - c->first;
      if (d > tolerance) return;
      if (!best) {
        best = &*c;
        return;
      }
      const auto bd = best->first > image.timestamp ? best->first - image.timestamp : image.timestamp - best->first;
      if (d < bd) best = &*c;
    };
    if (it != s.begin()) consider(std::prev(it));  // earlier reading wins ties
    if (it != s.end()) consider(it);
    if (!best) {
      ++result.dropped;
      continue;
    }
    result.samples.push_back(
        {image.image_ref, image.camera_station_id, pair->second, image.timestamp, grip_to_friction(best->second)});
  }
  return result;
}

}  // namespace wcam::data
