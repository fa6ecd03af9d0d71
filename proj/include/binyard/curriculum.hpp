#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "binyard/checkpoint.hpp"
#include "binyard/env.hpp"
#include "binyard/ppo.hpp"

namespace binyard {

/// One training stage: environment settings, reward, budget and which
/// network is trainable.
struct PhaseConfig {
  std::string name;
  std::uint64_t budget_timesteps = 0;
  double timestep_seconds = 60.0;
  int episode_length_steps = 600;
  RewardSpec reward_spec;
  bool stochastic_fill = true;
  bool pu_constrained = true;
  bool freeze_policy = false;
  bool freeze_value = false;
  std::optional<double> target_kl;
  InitMode init_mode = InitMode::Uniform;

  void validate() const;
  EnvConfig env_config(const PlantConfig& plant) const;
  bool operator==(const PhaseConfig&) const;
};

struct CurriculumPlan {
  std::vector<PhaseConfig> phases;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";

  void validate() const;
  std::uint64_t total_budget() const;
};

/// The five-phase schedule: three short deterministic unconstrained phases
/// with progressively stricter rewards, then value-only adaptation to the
/// stochastic constrained plant and a KL-limited fine-tune.
CurriculumPlan default_plan();

/// Every phase budget multiplied by `factor` (rounded, at least 1).
CurriculumPlan scaled(CurriculumPlan plan, double factor);

/// Hyperparameters for one phase: base values with the phase's freeze flags
/// and KL limit, and update sizes capped by the phase budget.
PPOHyperparams phase_hyperparams(const PhaseConfig& phase, const PPOHyperparams& base);

std::uint64_t phase_seed(std::uint64_t master_seed, std::size_t phase_index);

/// Trains one phase starting from `incoming` (fresh init when empty).
/// Rejects a checkpoint whose dimensions do not fit the phase environment.
TrainResult run_phase(const PhaseConfig& phase, const PlantConfig& plant, const std::optional<PolicyCheckpoint>& incoming,
                      std::uint64_t seed, const PPOHyperparams& base_hp,
                      const std::optional<std::filesystem::path>& log_path = std::nullopt);

struct CurriculumResult {
  PolicyCheckpoint final_checkpoint;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<std::filesystem::path> logs;
};

/// Runs all phases in order, writing ckpt_phase<k>.bin and train_phase<k>.csv
/// into `out_dir`. A failing phase is reported as "phase <k> (<name>): ...".
CurriculumResult run_curriculum(const CurriculumPlan& plan, const PlantConfig& plant, const PPOHyperparams& base_hp,
                                const std::filesystem::path& out_dir);

}  // namespace binyard
