#pragma once

#include <cstdint>

namespace binyard {

struct GradCheckResult {
  int nets_checked = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckStep = 1e-5;

/// Compares MLP backward() against central finite differences of
/// <forward(x), g> on `trials` random nets. `perturb` corrupts one analytic
/// gradient entry per net (negative control).
GradCheckResult gradient_check(std::uint64_t seed, int trials = 20, bool perturb = false);

/// |a - b| / max(|a|, |b|, 1e-6)
double relative_error(double a, double b);

}  // namespace binyard
