#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "wcam/util/time.hpp"

namespace wcam::data {

inline constexpr double kGripMin = 0.09;
inline constexpr double kGripMax = 0.82;

// Default image/reading alignment tolerance (inclusive).
inline constexpr std::chrono::seconds kAlignmentTolerance{600};

struct GripReading {
  std::string station_id;
  Timestamp timestamp;
  double grip = 0.0;
  int sensor_index = 1;
};

// One archived camera image before labelling.
struct ImageObservation {
  std::string image_ref;
  std::string camera_station_id;
  Timestamp timestamp;
};

struct LabeledSample {
  std::string image_ref;
  std::string camera_station_id;
  std::string weather_station_id;
  Timestamp timestamp;
  double friction_factor = 0.0;

  bool operator==(const LabeledSample&) const = default;
};

double clamp_grip(double grip);
double grip_to_friction(double grip);
double friction_to_grip(double friction);

// Mean grip of the readings taken at one station and time.
double aggregate_readings(const std::vector<GripReading>& readings);

// camera station id -> weather station id
using StationPairing = std::map<std::string, std::string>;

struct PairingResult {
  std::vector<LabeledSample> samples;
  std::size_t dropped = 0;          // images with no reading inside the tolerance
  std::size_t clamped_readings = 0; // readings outside the sensor range
};

// Labels each image with the nearest aggregated reading of its paired weather
// station. Readings are clamped to the sensor range before averaging.
PairingResult pair_and_label(const std::vector<ImageObservation>& images, const std::vector<GripReading>& readings,
                             const StationPairing& pairing,
                             std::chrono::seconds tolerance = kAlignmentTolerance);

}  // namespace wcam::data
