#pragma once

#include <array>

#include <nlohmann/json.hpp>

namespace wcam::data {

// Per-channel RGB statistics on the [0, 1] pixel scale.
struct Normalization {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std{1.0, 1.0, 1.0};

  bool operator==(const Normalization&) const = default;
};

inline void to_json(nlohmann::json& j, const Normalization& n) { j = {{"mean", n.mean}, {"std", n.std}}; }

inline void from_json(const nlohmann::json& j, Normalization& n) {
  n.mean = j.at("mean").get<std::array<double, 3>>();
  n.std = j.at("std").get<std::array<double, 3>>();
}

}  // namespace wcam::data
