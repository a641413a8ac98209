#pragma once

#include "rascore/tensor.hpp"

namespace rascore {

struct LossResult {
  double loss = 0.0;
  Tensor grad;
};

/// Mean binary cross-entropy in natural log units. Predictions are
/// clamped to [1e-7, 1 - 1e-7]; the gradient per element is
/// (p - y) / (p * (1 - p)) / N at the clamped prediction.
LossResult bce_loss(const Tensor& pred, const Tensor& target);

}  // namespace rascore
