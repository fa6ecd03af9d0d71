#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binyard/plant.hpp"
#include "binyard/rewards.hpp"
#include "binyard/rng.hpp"

namespace binyard {

enum class InitMode {
  Zeros,    // every container empty
  Phase1,   // 8..11 of 11 containers start just below their ideal volume
  Uniform,  // each container uniform in [0, ideal)
};

std::string to_string(InitMode m);
InitMode init_mode_from_string(const std::string& s);

/// Horizon (in steps) used to normalise PU busy times in the observation.
inline constexpr double kPuHorizonSteps = 600.0;

struct EnvConfig {
  PlantConfig plant;
  double timestep_seconds = 60.0;
  int episode_length = 600;
  bool stochastic_fill = true;
  bool pu_constrained = true;
  RewardSpec reward_spec;
  InitMode init_mode = InitMode::Uniform;
  bool eval_mode = false;

  void validate() const;

  int n_containers() const { return plant.n_containers(); }
  int n_actions() const { return plant.n_containers() + 1; }
  /// n volumes + m PU times + n flags + n rewards + n ideal volumes.
  int observation_dim() const { return 4 * plant.n_containers() + plant.n_pus(); }

  /// Drift per step at this step length (alpha is specified per 60 s).
  double alpha_per_step(int ci) const;
  double sigma_per_step(int ci) const;
};

struct EnvState {
  std::vector<double> volumes;
  /// belt_busy[j][k]: remaining seconds on belt k of PU j (0 = free).
  std::vector<std::vector<double>> belt_busy;
  std::vector<bool> emptying_flags;
  std::vector<double> last_rewards;
  int step_index = 0;
  Rng rng;

  /// Seconds until PU j has at least one free belt.
  double pu_free_in(int j) const;
};

using Observation = std::vector<double>;

struct StepInfo {
  bool action_success = false;
  int acted_container = 0;      // 1-based, 0 when no emptying was attempted
  int pu_assigned = 0;          // PU id, 0 when none
  double emptied_volume = 0.0;  // volume removed on success
  double busy_seconds = 0.0;    // PU time booked by this emptying
  int overflow_count = 0;       // containers above max_volume after the step
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  std::vector<double> per_container_rewards;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

/// Build the flattened, normalised agent view of `state`.
Observation make_observation(const EnvState& state, const EnvConfig& config);

/// Fresh episode. Same (config, seed) gives a bit-identical state.
EnvState reset_state(const EnvConfig& config, std::uint64_t seed);

/// Entry 0 always true; entry i true iff container i has volume and an allowed PU belt is free.
std::vector<bool> action_mask(const EnvState& state, const EnvConfig& config);

/// Advance one step in place. Throws std::out_of_range for an invalid action.
StepOutcome step(EnvState& state, int action, const EnvConfig& config);

/// Object wrapper holding config + state, the usual environment interface.
class Env {
 public:
  explicit Env(EnvConfig config);

  Observation reset(std::uint64_t seed);
  StepOutcome step(int action);
  std::vector<bool> mask() const { return action_mask(state_, config_); }

  const EnvConfig& config() const { return config_; }
  const EnvState& state() const { return state_; }
  EnvState& mutable_state() { return state_; }

 private:
  EnvConfig config_;
  EnvState state_;
};

}  // namespace binyard
