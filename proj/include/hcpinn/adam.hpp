#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/network.hpp"

namespace hcpinn {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState fresh(const NetworkParams& params, double learning_rate = 1e-4) {
    AdamState s;
    s.first_moment.assign(params.size(), 0.0);
    s.second_moment.assign(params.size(), 0.0);
    s.learning_rate = learning_rate;
    return s;
  }
};

/// In-place bias-corrected Adam update.
inline void adam_update(NetworkParams& params, const NetworkParams& grads, AdamState& state) {
  if (!grads.same_shape(params)) throw ConfigError("gradient shape does not match parameters");
  if (state.first_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw ConfigError("Adam state shape does not match parameters");
  }
  ++state.step_count;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  auto theta = params.data();
  auto g = grads.data();
  auto& m = state.first_moment;
  auto& v = state.second_moment;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    theta[i] -= state.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.epsilon);
  }
}

inline std::pair<NetworkParams, AdamState> adam_step(NetworkParams params, const NetworkParams& grads,
                                                     AdamState state) {
  adam_update(params, grads, state);
  return {std::move(params), std::move(state)};
}

}  // namespace hcpinn
