#include "rascore/optim.hpp"

#include "rascore/image.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rascore/loss.hpp"

namespace rascore {

AdamState AdamState::for_params(const ParamSet& params) {
  AdamState s;
  s.m.reserve(params.entries.size());
  s.v.reserve(params.entries.size());
  for (const auto& e : params.entries) {
    s.m.emplace_back(e.value.shape);
    s.v.emplace_back(e.value.shape);
  }
  return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr) {
  if (params.entries.size() != grads.entries.size() || params.entries.size() != state.m.size())
    throw InvalidInput("adam_step: structure mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    auto& p = params.entries[i];
    if (p.frozen) continue;
    const auto& g = grads.entries[i].value;
    if (!p.value.same_shape(g)) throw InvalidInput("adam_step: shape mismatch");
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double gj = g.data[j];
      m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * gj;
      v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * gj * gj;
      const double mhat = m.data[j] / bc1;
      const double vhat = v.data[j] / bc2;
      p.value.data[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double grad_check(const Graph& g, const ParamSet& params, const Tensor& input, const Tensor& target,
                  double eps, int sample_count, std::uint64_t seed) {
  ForwardCache cache;
  Tensor out = forward(g, params, input, &cache);
  LossResult lr = bce_loss(out, target);
  BackwardResult back = backward(g, params, cache, lr.grad);

  // Flat index over all parameter scalars.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t e = 0; e < params.entries.size(); ++e)
    for (std::size_t j = 0; j < params.entries[e].value.size(); ++j) coords.emplace_back(e, j);

  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> picked;
  if (static_cast<int>(coords.size()) <= sample_count) {
    picked = coords;
  } else {
    std::vector<std::size_t> idx(coords.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i = 0; i < sample_count; ++i) picked.push_back(coords[idx[i]]);
  }

  ParamSet probe = params;
  double max_err = 0.0;
  for (auto [e, j] : picked) {
    const double orig = probe.entries[e].value.data[j];
    probe.entries[e].value.data[j] = orig + eps;
    const double lp = bce_loss(forward(g, probe, input, nullptr), target).loss;
    probe.entries[e].value.data[j] = orig - eps;
    const double lm = bce_loss(forward(g, probe, input, nullptr), target).loss;
    probe.entries[e].value.data[j] = orig;

    const double numeric = (lp - lm) / (2.0 * eps);
    const double analytic = back.grads.entries[e].value.data[j];
    const double denom = std::max(1e-6, std::min(std::abs(numeric), std::abs(analytic)));
    max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
  }
  return max_err;
}

}  // namespace rascore
