#pragma once

#include <cstdint>
#include <vector>

#include "rascore/image.hpp"

namespace rascore {

enum class ScoreTask { Erosion, Narrowing };

/// Per-task class-count configuration. Defaults follow the SvH ranges:
/// narrowing 0-4 for both limb types, erosion 0-5 (hands) and 0-10
/// (feet).
struct ScoreScale {
  ScoreTask task = ScoreTask::Narrowing;
  bool hand = true;
  int classes = 5;

  static ScoreScale narrowing_hand() { return {ScoreTask::Narrowing, true, 5}; }
  static ScoreScale narrowing_foot() { return {ScoreTask::Narrowing, false, 5}; }
  static ScoreScale erosion_hand() { return {ScoreTask::Erosion, true, 6}; }
  static ScoreScale erosion_foot() { return {ScoreTask::Erosion, false, 11}; }
};

/// Cumulative encoding: class k becomes k+1 leading ones, e.g. with
/// three classes 0 -> [1,0,0], 1 -> [1,1,0], 2 -> [1,1,1].
std::vector<double> ordinal_encode(int k, int classes);

/// Length of the maximal consecutive prefix of entries > 0.5, minus
/// one, floored at zero.
int ordinal_decode(const std::vector<double>& v);

/// Reduce the class-0 sample count to the second-largest class count
/// by seeded uniform sampling without replacement. Other classes and
/// the relative sample order are untouched. Returns the kept indices.
std::vector<std::size_t> undersample_indices(const std::vector<int>& labels, std::uint64_t seed);

}  // namespace rascore
