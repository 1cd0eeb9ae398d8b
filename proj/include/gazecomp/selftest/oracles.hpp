#ifndef GAZECOMP_SELFTEST_ORACLES_HPP
#define GAZECOMP_SELFTEST_ORACLES_HPP

// Reference computations written independently of the library code paths
// they check. Slow on purpose.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gazecomp/evaluation.hpp"
#include "gazecomp/gaze.hpp"

namespace gazecomp::selftest {

struct GazeOracle {
  std::map<std::size_t, std::uint64_t> first_pass;
  std::map<std::size_t, std::uint64_t> regression;
  std::map<std::size_t, std::uint64_t> total;
};

/// For each word: locate its first fixation, extend over the consecutive
/// fixations on the same word, call that the first pass; the rest is
/// regression.
GazeOracle brute_force_gaze(std::span<const FixationEvent> events);

/// Bin by counting crossed thresholds.
int bin_oracle(double value, double mean, double sd);

/// Longest common subsequence length by enumerating subsets of `source`
/// (source length <= 20).
std::size_t brute_force_lcs_length(std::span<const std::string> source, std::span<const std::string> target);

/// Lexicographically smallest source positions spelling `target`, or empty
/// if `target` is not a subsequence. Enumerates subsets.
std::vector<std::size_t> brute_force_leftmost_embedding(std::span<const std::string> source,
                                                        std::span<const std::string> target);

ConfusionCounts brute_force_confusion(std::span<const std::vector<std::string>> gold,
                                      std::span<const std::vector<std::string>> pred, const std::string& positive);

/// F1 from counts with the zero-denominator convention.
double f1_from_counts(const ConfusionCounts& counts);

}  // namespace gazecomp::selftest

#endif  // GAZECOMP_SELFTEST_ORACLES_HPP
