#pragma once

#include <span>
#include <string>
#include <vector>

namespace binyard {

enum class RewardKind { SimpleGaussian, Custom, Precision, PrecisionWithActionPenalty };

std::string to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& s);

struct RewardSpec {
  RewardKind kind = RewardKind::Custom;
  double peak_height = 1.0;
  double peak_width = 5.0;
  double penalty = -1.0;
  double action_penalty = 0.1;
  bool positional_enabled = true;
  bool termination_enabled = true;
  double termination_bonus = 0.2;
  double overflow_penalty = -30.0;
  double precision_halfwidth = 0.5;

  void validate() const;

  /// Defaults for each kind. SimpleGaussian carries only the emptying term.
  static RewardSpec for_kind(RewardKind kind);
};

/// Emptying reward peaked at the ideal volume. Caller guarantees action > 0.
double gaussian_reward(int action, double volume, double ideal, bool pu_available, const RewardSpec& spec);

/// Per-container shaping term; maximal (1) at the ideal, flat -0.1 above it.
double positional_reward(double volume, double ideal);

double cumulative_positional(std::span<const double> volumes, std::span<const double> ideals);

double termination_reward(bool any_overflow, const RewardSpec& spec);

/// +1 strictly inside (ideal - halfwidth, ideal + halfwidth), -0.1 otherwise.
double precision_reward(double volume, double ideal, const RewardSpec& spec);

struct TransitionFacts {
  int action = 0;  // 0 = do nothing, i = container index + 1
  bool success = false;
  std::span<const double> volumes_before;
  std::span<const double> volumes_after;
  std::span<const double> ideals;
  bool any_overflow = false;
};

struct ComposedReward {
  double total = 0.0;
  std::vector<double> per_container;
};

/// Sum of the enabled terms for one transition.
///
/// The action term (gaussian, precision, action penalty) is evaluated on the
/// acted container's volume before the step. Positional terms use the volumes
/// after the step. Per-container entries hold each container's positional term
/// plus the action term for the container that was acted on.
ComposedReward compose_reward(const TransitionFacts& facts, const RewardSpec& spec);

}  // namespace binyard
