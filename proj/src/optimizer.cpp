#include "binyard/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "binyard/kernels.hpp"

namespace binyard {

void adam_update(std::span<double> params, std::span<const double> grads, double step_size, AdamState& state) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_update: params/grads length mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw std::runtime_error("adam_update: non-finite gradient at index " + std::to_string(i) + " (value " +
                               std::to_string(grads[i]) + ")");

  if (state.mode == OptimizerMode::GradientDescent) {
    kernels::active().axpy(-step_size, grads.data(), params.data(), params.size());
    return;
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("adam_update: moment state has wrong length");

  ++state.t;
  const kernels::AdamCoeffs c{step_size,
                              state.beta1,
                              state.beta2,
                              state.eps,
                              1.0 - std::pow(state.beta1, static_cast<double>(state.t)),
                              1.0 - std::pow(state.beta2, static_cast<double>(state.t))};
  kernels::active().adam(params.data(), grads.data(), state.m.data(), state.v.data(), params.size(), c);
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  const double norm = std::sqrt(kernels::active().dot(grads.data(), grads.data(), grads.size()));
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

}  // namespace binyard
