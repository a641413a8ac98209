#pragma once

#include "rascore/graph.hpp"

namespace rascore {

/// Adam moments, one pair of tensors per parameter, shared step count.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState for_params(const ParamSet& params);
};

/// One bias-corrected Adam update. Frozen tensors are left bit-identical.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr);

/// Compare analytic gradients against central finite differences of the
/// BCE loss on a random subsample of parameters (all of them when the
/// model has fewer than sample_count). Returns the maximum relative
/// error.
double grad_check(const Graph& g, const ParamSet& params, const Tensor& input, const Tensor& target,
                  double eps = 1e-5, int sample_count = 100, std::uint64_t seed = 7);

}  // namespace rascore
