#pragma once

#include <map>
#include <string>

#include "rascore/graph.hpp"

namespace rascore {

/// Versioned model container: layer graph, parameter tensors with
/// frozen flags, training seed, and free-form metadata. The format is
/// line-oriented text with parameter payloads stored as hex-encoded
/// IEEE-754 bit patterns, so round trips are bit-exact.
struct Checkpoint {
  static constexpr int kVersion = 1;
  std::string tag;
  std::uint64_t seed = 0;
  Graph graph;
  ParamSet params;
  std::map<std::string, std::string> meta;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rascore
