#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wcam/data/labels.hpp"

namespace wcam::data {

inline constexpr int kDefaultBins = 10;

// Equal-width bin of a friction factor over [0, 1]; 1.0 lands in the last bin.
int friction_bin(double friction, int n_bins = kDefaultBins);

std::vector<std::size_t> friction_histogram(const std::vector<LabeledSample>& samples, int n_bins = kDefaultBins);
std::vector<std::size_t> friction_histogram(const std::vector<double>& friction, int n_bins = kDefaultBins);

// max / min over bins with a nonzero count; 1 when fewer than two bins are occupied.
double occupied_bin_ratio(const std::vector<std::size_t>& histogram);

// Inclusion probabilities proportional to 1 / (count of the sample's bin),
// scaled to sum to min(target_size, n) and capped at 1.
std::vector<double> inclusion_probabilities(const std::vector<LabeledSample>& samples, int n_bins,
                                            std::size_t target_size);

// Draws min(target_size, n) samples without replacement. Systematic sampling
// over the bin-grouped, within-bin shuffled sample list, so each bin receives
// the floor or ceiling of its expected share. Output keeps input order.
std::vector<LabeledSample> weighted_resample(const std::vector<LabeledSample>& samples, int n_bins,
                                             long long target_size, std::uint64_t seed);

enum class Split { train, val, test };

inline constexpr std::array<Split, 3> kSplits{Split::train, Split::val, Split::test};

std::string to_string(Split s);
Split parse_split(const std::string& name);

using SplitFractions = std::array<double, 3>;
inline constexpr SplitFractions kDefaultSplitFractions{0.50, 0.15, 0.35};

// camera station id -> split
using SplitAssignment = std::map<std::string, Split>;

// Greedy allocation: stations in decreasing sample count go to the split with
// the largest remaining deficit (target mass minus assigned mass). Equal-count
// stations are ordered by a seeded shuffle; equal deficits prefer train, val,
// test. Once the stations left only just cover the still-empty splits, each
// goes to an empty split so no split ends up without a station.
SplitAssignment split_by_station(const std::vector<LabeledSample>& samples,
                                 const SplitFractions& fractions = kDefaultSplitFractions, std::uint64_t seed = 0);

// Realized sample fraction per split.
SplitFractions split_fractions(const std::vector<LabeledSample>& samples, const SplitAssignment& assignment);

using StationSets = std::array<std::set<std::string>, 3>;

// Stations seen in each split, indexed by Split.
StationSets station_sets(const std::vector<LabeledSample>& samples, const SplitAssignment& assignment);

bool pairwise_disjoint(const StationSets& sets);

}  // namespace wcam::data
