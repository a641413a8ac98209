#pragma once

#include <cstdint>
#include <optional>

#include "rascore/image.hpp"

namespace rascore {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 16;
  int max_epochs = 200;
  std::optional<int> early_stop_patience = 10;
  std::uint64_t seed = 42;
  bool verbose = false;

  void validate() const {
    if (learning_rate <= 0.0) throw InvalidInput("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw InvalidInput("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw InvalidInput("TrainConfig: max_epochs must be >= 1");
  }
};

}  // namespace rascore
