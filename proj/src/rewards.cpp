#include "binyard/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace binyard {

std::string to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::SimpleGaussian: return "SimpleGaussian";
    case RewardKind::Custom: return "Custom";
    case RewardKind::Precision: return "Precision";
    case RewardKind::PrecisionWithActionPenalty: return "PrecisionWithActionPenalty";
  }
  return "?";
}

RewardKind reward_kind_from_string(const std::string& s) {
  if (s == "SimpleGaussian") return RewardKind::SimpleGaussian;
  if (s == "Custom") return RewardKind::Custom;
  if (s == "Precision") return RewardKind::Precision;
  if (s == "PrecisionWithActionPenalty") return RewardKind::PrecisionWithActionPenalty;
  throw std::invalid_argument("unknown reward kind '" + s + "'");
}

void RewardSpec::validate() const {
  if (!(peak_height <= 1.0 && peak_height > penalty))
    throw std::invalid_argument("reward spec: need penalty < peak_height <= 1");
  if (!(peak_width > 0)) throw std::invalid_argument("reward spec: peak_width must be > 0");
  if (!(precision_halfwidth > 0)) throw std::invalid_argument("reward spec: precision_halfwidth must be > 0");
}

RewardSpec RewardSpec::for_kind(RewardKind kind) {
  RewardSpec s;
  s.kind = kind;
  if (kind == RewardKind::SimpleGaussian) {
    s.positional_enabled = false;
    s.termination_enabled = false;
  }
  return s;
}

double gaussian_reward(int action, double volume, double ideal, bool pu_available, const RewardSpec& spec) {
  (void)action;
  if (volume == 0.0 || !pu_available) return spec.penalty;
  const double d = volume - ideal;
  const double w = spec.peak_width;
  return (spec.peak_height - spec.penalty) * std::exp(-(d * d) / (2.0 * w * w)) + spec.penalty;
}

double positional_reward(double volume, double ideal) {
  if (!(ideal > 0)) throw std::invalid_argument("positional_reward: ideal must be > 0");
  if (volume <= ideal) return 1.0 - std::sqrt(std::fabs((ideal - volume) / ideal));
  return -0.1;
}

double cumulative_positional(std::span<const double> volumes, std::span<const double> ideals) {
  if (volumes.size() != ideals.size())
    throw std::invalid_argument("cumulative_positional: volumes/ideals length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < volumes.size(); ++i) sum += positional_reward(volumes[i], ideals[i]);
  return sum;
}

double termination_reward(bool any_overflow, const RewardSpec& spec) {
  return any_overflow ? spec.overflow_penalty : spec.termination_bonus;
}

double precision_reward(double volume, double ideal, const RewardSpec& spec) {
  const double hw = spec.precision_halfwidth;
  return (ideal - hw < volume && volume < ideal + hw) ? 1.0 : -0.1;
}

ComposedReward compose_reward(const TransitionFacts& f, const RewardSpec& spec) {
  const std::size_t n = f.ideals.size();
  if (f.volumes_before.size() != n || f.volumes_after.size() != n)
    throw std::invalid_argument("compose_reward: vector length mismatch");
  if (f.action < 0 || f.action > static_cast<int>(n))
    throw std::invalid_argument("compose_reward: action out of range");

  ComposedReward out;
  out.per_container.assign(n, 0.0);

  double action_term = 0.0;
  if (f.action > 0) {
    const std::size_t c = static_cast<std::size_t>(f.action - 1);
    const double v = f.volumes_before[c];
    // A failed attempt is scored like a zero-volume attempt: r_pen.
    action_term = gaussian_reward(f.action, v, f.ideals[c], f.success, spec);
    const bool precise = spec.kind == RewardKind::Precision || spec.kind == RewardKind::PrecisionWithActionPenalty;
    if (precise) action_term += f.success ? precision_reward(v, f.ideals[c], spec) : -0.1;
    if (spec.kind == RewardKind::PrecisionWithActionPenalty) action_term -= spec.action_penalty;
    out.per_container[c] += action_term;
  }

  double positional = 0.0;
  if (spec.positional_enabled) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = positional_reward(f.volumes_after[i], f.ideals[i]);
      out.per_container[i] += r;
      positional += r;
    }
  }

  const double termination = spec.termination_enabled ? termination_reward(f.any_overflow, spec) : 0.0;
  out.total = action_term + positional + termination;
  return out;
}

}  // namespace binyard
