#include "rascore/loss.hpp"

#include "rascore/image.hpp"

#include <algorithm>
#include <cmath>

namespace rascore {

LossResult bce_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) throw InvalidInput("bce_loss: shape mismatch");
  constexpr double kEps = 1e-7;
  const double n = static_cast<double>(pred.size());
  LossResult res;
  res.grad = Tensor(pred.shape);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred.data[i], kEps, 1.0 - kEps);
    const double y = target.data[i];
    acc += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    res.grad.data[i] = (p - y) / (p * (1.0 - p)) / n;
  }
  res.loss = -acc / n;
  return res;
}

}  // namespace rascore
