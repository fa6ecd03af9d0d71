#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace binyard {

enum class OptimizerMode { Adam, GradientDescent };

struct AdamState {
  OptimizerMode mode = OptimizerMode::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n = 0, OptimizerMode mode_ = OptimizerMode::Adam)
      : mode(mode_), m(n, 0.0), v(n, 0.0) {}
};

/// One optimizer step. Throws std::invalid_argument on length mismatch and
/// std::runtime_error naming the first non-finite gradient entry.
void adam_update(std::span<double> params, std::span<const double> grads, double step_size, AdamState& state);

/// Scales `grads` in place so their L2 norm is at most `max_norm`. Returns the norm before scaling.
double clip_grad_norm(std::span<double> grads, double max_norm);

}  // namespace binyard
