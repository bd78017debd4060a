#include "wcam/data/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcam/util/error.hpp"
#include "wcam/util/random.hpp"

namespace wcam::data {

int friction_bin(double friction, int n_bins) {
  if (n_bins < 1) throw ArgumentError("bin count must be positive");
  const int b = static_cast<int>(std::floor(friction * n_bins));
  return std::clamp(b, 0, n_bins - 1);
}

std::vector<std::size_t> friction_histogram(const std::vector<double>& friction, int n_bins) {
  std::vector<std::size_t> h(static_cast<std::size_t>(n_bins), 0);
  for (double f : friction) ++h[static_cast<std::size_t>(friction_bin(f, n_bins))];
  return h;
}

std::vector<std::size_t> friction_histogram(const std::vector<LabeledSample>& samples, int n_bins) {
  std::vector<double> f;
  f.reserve(samples.size());
  for (const auto& s : samples) f.push_back(s.friction_factor);
  return friction_histogram(f, n_bins);
}

double occupied_bin_ratio(const std::vector<std::size_t>& histogram) {
  std::size_t lo = 0, hi = 0;
  for (auto c : histogram) {
    if (c == 0) continue;
    lo = lo == 0 ? c : std::min(lo, c);
    hi = std::max(hi, c);
  }
  return lo == 0 ? 1.0 : static_cast<double>(hi) / static_cast<double>(lo);
}

std::vector<double> inclusion_probabilities(const std::vector<LabeledSample>& samples, int n_bins,
                                            std::size_t target_size) {
  const auto hist = friction_histogram(samples, n_bins);
  const std::size_t n = samples.size();
  const double m = static_cast<double>(std::min(target_size, n));
  std::vector<double> weight(n), pi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    weight[i] = 1.0 / static_cast<double>(hist[static_cast<std::size_t>(friction_bin(samples[i].friction_factor, n_bins))]);

  // Water-filling: units whose scaled weight reaches 1 are taken with
  // certainty and the remaining mass is spread over the others.
  std::vector<bool> capped(n, false);
  double remaining = m;
  for (;;) {
    double free_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!capped[i]) free_weight += weight[i];
    if (free_weight <= 0.0) break;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) continue;
      pi[i] = remaining * weight[i] / free_weight;
      if (pi[i] >= 1.0) {
        capped[i] = true;
        pi[i] = 1.0;
        remaining -= 1.0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return pi;
}

std::vector<LabeledSample> weighted_resample(const std::vector<LabeledSample>& samples, int n_bins,
                                             long long target_size, std::uint64_t seed) {
  if (target_size <= 0) throw ArgumentError("weighted_resample: target size must be positive");
  if (n_bins < 2) throw ArgumentError("weighted_resample: need at least two bins");
  if (samples.empty()) throw ArgumentError("weighted_resample: no samples");
  const auto pi = inclusion_probabilities(samples, n_bins, static_cast<std::size_t>(target_size));

  Rng rng(seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return friction_bin(samples[a].friction_factor, n_bins) < friction_bin(samples[b].friction_factor, n_bins);
  });

  std::vector<std::size_t> chosen;
  const double start = rng.uniform();
  double cumulative = 0.0, next = start;
  for (auto i : order) {
    cumulative += pi[i];
    // Tolerance absorbs round-off so certainty units (pi = 1) are never missed.
    while (next < cumulative - 1e-9 && chosen.size() < samples.size()) {
      chosen.push_back(i);
      next += 1.0;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  std::vector<LabeledSample> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(samples[i]);
  return out;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ArgumentError("unknown split '" + name + "' (expected train, val or test)");
}

SplitAssignment split_by_station(const std::vector<LabeledSample>& samples, const SplitFractions& fractions,
                                 std::uint64_t seed) {
  for (double f : fractions)
    if (!(f >= 0.0)) throw ArgumentError("split fractions must be non-negative");
  const double fsum = fractions[0] + fractions[1] + fractions[2];
  if (fsum <= 0.0) throw ArgumentError("split fractions sum to zero");

  std::map<std::string, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.camera_station_id];
  if (counts.size() < kSplits.size())
    throw ArgumentError("split_by_station: " + std::to_string(counts.size()) + " stations cannot fill " +
                        std::to_string(kSplits.size()) + " splits");

  std::vector<std::pair<std::string, std::size_t>> stations(counts.begin(), counts.end());
  Rng rng(seed);
  std::shuffle(stations.begin(), stations.end(), rng.engine());
  std::stable_sort(stations.begin(), stations.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  const double total = static_cast<double>(samples.size());
  std::array<double, 3> deficit{};
  for (std::size_t k = 0; k < 3; ++k) deficit[k] = total * fractions[k] / fsum;
  std::array<std::size_t, 3> members{};

  SplitAssignment out;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const std::size_t left = stations.size() - i;
    const auto empty = static_cast<std::size_t>(std::count(members.begin(), members.end(), 0u));
    std::size_t best = 3;
    for (std::size_t k = 0; k < 3; ++k) {
      if (left <= empty && members[k] != 0) continue;
      if (best == 3 || deficit[k] > deficit[best]) best = k;
    }
    out[stations[i].first] = kSplits[best];
    deficit[best] -= static_cast<double>(stations[i].second);
    ++members[best];
  }
  return out;
}

SplitFractions split_fractions(const std::vector<LabeledSample>& samples, const SplitAssignment& assignment) {
  SplitFractions f{};
  if (samples.empty()) return f;
  for (const auto& s : samples) f[static_cast<std::size_t>(assignment.at(s.camera_station_id))] += 1.0;
  for (auto& v : f) v /= static_cast<double>(samples.size());
  return f;
}

StationSets station_sets(const std::vector<LabeledSample>& samples, const SplitAssignment& assignment) {
  StationSets sets;
  for (const auto& s : samples) {
    const auto it = assignment.find(s.camera_station_id);
    if (it == assignment.end()) throw ArgumentError("station '" + s.camera_station_id + "' has no split");
    sets[static_cast<std::size_t>(it->second)].insert(s.camera_station_id);
  }
  return sets;
}

bool pairwise_disjoint(const StationSets& sets) {
  for (std::size_t a = 0; a < sets.size(); ++a)
    for (std::size_t b = a + 1; b < sets.size(); ++b)
      for (const auto& id : sets[a])
        if (sets[b].count(id)) return false;
  return true;
}

}  // namespace wcam::data
