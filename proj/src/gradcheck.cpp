#include "binyard/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "binyard/mlp.hpp"
#include "binyard/rng.hpp"

namespace binyard {

double relative_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-6});
}

GradCheckResult gradient_check(std::uint64_t seed, int trials, bool perturb) {
  Rng rng(seed);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_int_distribution<int> depth(1, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  GradCheckResult res;
  for (int t = 0; t < trials; ++t) {
    MlpSpec spec;
    spec.input_dim = dim(rng);
    spec.output_dim = dim(rng);
    spec.hidden_layers.assign(depth(rng), 0);
    for (int& h : spec.hidden_layers) h = dim(rng);

    ParamSet params(spec.param_count());
    init_params(spec, params, rng, 1.0);
    std::vector<double> x(spec.input_dim), g(spec.output_dim);
    for (double& v : x) v = u(rng);
    for (double& v : g) v = u(rng);

    ForwardCache cache;
    forward(spec, params, x, cache);
    params.zero_grad();
    backward(spec, params, cache, g);
    if (perturb) params.grads[0] += 1e-2 * (1.0 + std::fabs(params.grads[0]));

    auto loss = [&](const ParamSet& p) {
      const auto y = forward(spec, p, x);
      double s = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) s += y[k] * g[k];
      return s;
    };

    ParamSet probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = probe.values[i];
      probe.values[i] = saved + kGradCheckStep;
      const double up = loss(probe);
      probe.values[i] = saved - kGradCheckStep;
      const double down = loss(probe);
      probe.values[i] = saved;
      const double numeric = (up - down) / (2.0 * kGradCheckStep);
      res.max_relative_error = std::max(res.max_relative_error, relative_error(params.grads[i], numeric));
    }
    ++res.nets_checked;
  }
  res.passed = res.max_relative_error < kGradCheckTolerance;
  return res;
}

}  // namespace binyard
