#include "binyard/curriculum.hpp"

#include <cmath>
#include <stdexcept>

namespace binyard {

void PhaseConfig::validate() const {
  if (budget_timesteps == 0) throw std::invalid_argument("phase " + name + ": budget must be > 0");
  if (episode_length_steps < 1) throw std::invalid_argument("phase " + name + ": episode length must be > 0");
  if (!(timestep_seconds > 0)) throw std::invalid_argument("phase " + name + ": timestep must be > 0");
  if (freeze_policy && freeze_value) throw std::invalid_argument("phase " + name + ": cannot freeze both networks");
  reward_spec.validate();
}

EnvConfig PhaseConfig::env_config(const PlantConfig& plant) const {
  EnvConfig c;
  c.plant = plant;
  c.timestep_seconds = timestep_seconds;
  c.episode_length = episode_length_steps;
  c.stochastic_fill = stochastic_fill;
  c.pu_constrained = pu_constrained;
  c.reward_spec = reward_spec;
  c.init_mode = init_mode;
  c.eval_mode = false;
  return c;
}

namespace {

bool same_reward(const RewardSpec& a, const RewardSpec& b) {
  return a.kind == b.kind && a.peak_height == b.peak_height && a.peak_width == b.peak_width &&
         a.penalty == b.penalty && a.action_penalty == b.action_penalty &&
         a.positional_enabled == b.positional_enabled && a.termination_enabled == b.termination_enabled &&
         a.termination_bonus == b.termination_bonus && a.overflow_penalty == b.overflow_penalty &&
         a.precision_halfwidth == b.precision_halfwidth;
}

}  // namespace

bool PhaseConfig::operator==(const PhaseConfig& o) const {
  return name == o.name && budget_timesteps == o.budget_timesteps && timestep_seconds == o.timestep_seconds &&
         episode_length_steps == o.episode_length_steps && same_reward(reward_spec, o.reward_spec) &&
         stochastic_fill == o.stochastic_fill && pu_constrained == o.pu_constrained &&
         freeze_policy == o.freeze_policy && freeze_value == o.freeze_value && target_kl == o.target_kl &&
         init_mode == o.init_mode;
}

void CurriculumPlan::validate() const {
  if (phases.empty()) throw std::invalid_argument("curriculum plan has no phases");
  for (const auto& p : phases) p.validate();
}

std::uint64_t CurriculumPlan::total_budget() const {
  std::uint64_t total = 0;
  for (const auto& p : phases) total += p.budget_timesteps;
  return total;
}

CurriculumPlan default_plan() {
  auto phase = [](std::string name, std::uint64_t budget, double ts, int len, RewardKind kind, bool stochastic,
                  bool constrained, InitMode init) {
    PhaseConfig p;
    p.name = std::move(name);
    p.budget_timesteps = budget;
    p.timestep_seconds = ts;
    p.episode_length_steps = len;
    p.reward_spec = RewardSpec::for_kind(kind);
    p.stochastic_fill = stochastic;
    p.pu_constrained = constrained;
    p.init_mode = init;
    return p;
  };

  CurriculumPlan plan;
  plan.phases.push_back(phase("phase1", 1'500'000, 30, 25, RewardKind::Custom, false, false, InitMode::Phase1));
  plan.phases.push_back(phase("phase2", 1'000'000, 30, 25, RewardKind::Precision, false, false, InitMode::Phase1));
  plan.phases.push_back(
      phase("phase3", 1'000'000, 30, 25, RewardKind::PrecisionWithActionPenalty, false, false, InitMode::Phase1));
  auto p4 = phase("phase4", 500'000, 60, 600, RewardKind::Precision, true, true, InitMode::Uniform);
  p4.freeze_policy = true;
  plan.phases.push_back(p4);
  auto p5 = phase("phase5", 500'000, 60, 600, RewardKind::Precision, true, true, InitMode::Uniform);
  p5.target_kl = 0.01;
  plan.phases.push_back(p5);
  return plan;
}

CurriculumPlan scaled(CurriculumPlan plan, double factor) {
  if (!(factor > 0)) throw std::invalid_argument("scale factor must be > 0");
  for (auto& p : plan.phases) {
    const double b = std::round(static_cast<double>(p.budget_timesteps) * factor);
    p.budget_timesteps = static_cast<std::uint64_t>(std::max(1.0, b));
  }
  return plan;
}

PPOHyperparams phase_hyperparams(const PhaseConfig& phase, const PPOHyperparams& base) {
  PPOHyperparams hp = base;
  hp.freeze_policy = phase.freeze_policy;
  hp.freeze_value = phase.freeze_value;
  hp.target_kl = phase.target_kl;
  const auto budget = static_cast<int>(std::min<std::uint64_t>(phase.budget_timesteps, 1u << 30));
  hp.steps_per_update = std::min(hp.steps_per_update, budget);
  hp.minibatch_size = std::min(hp.minibatch_size, hp.steps_per_update);
  return hp;
}

std::uint64_t phase_seed(std::uint64_t master_seed, std::size_t phase_index) {
  return derive_seed(master_seed, streams::kPhase * 1000 + phase_index);
}

TrainResult run_phase(const PhaseConfig& phase, const PlantConfig& plant, const std::optional<PolicyCheckpoint>& incoming,
                      std::uint64_t seed, const PPOHyperparams& base_hp,
                      const std::optional<std::filesystem::path>& log_path) {
  phase.validate();
  const EnvConfig env = phase.env_config(plant);
  env.validate();
  if (incoming) {
    incoming->validate();
    if (incoming->policy_spec.input_dim != env.observation_dim() ||
        incoming->policy_spec.output_dim != env.n_actions())
      throw std::invalid_argument("phase " + phase.name + ": incoming checkpoint has " +
                                  std::to_string(incoming->policy_spec.input_dim) + " inputs / " +
                                  std::to_string(incoming->policy_spec.output_dim) + " actions, environment needs " +
                                  std::to_string(env.observation_dim()) + " / " + std::to_string(env.n_actions()));
  }
  return train(env, incoming, phase_hyperparams(phase, base_hp), phase.budget_timesteps, seed, phase.name, log_path);
}

CurriculumResult run_curriculum(const CurriculumPlan& plan, const PlantConfig& plant, const PPOHyperparams& base_hp,
                                const std::filesystem::path& out_dir) {
  plan.validate();
  plant.validate();
  std::filesystem::create_directories(out_dir);

  CurriculumResult result;
  std::optional<PolicyCheckpoint> current;
  for (std::size_t k = 0; k < plan.phases.size(); ++k) {
    const auto& phase = plan.phases[k];
    const auto ckpt_path = out_dir / ("ckpt_phase" + std::to_string(k + 1) + ".bin");
    const auto log_path = out_dir / ("train_phase" + std::to_string(k + 1) + ".csv");
    try {
      TrainResult r = run_phase(phase, plant, current, phase_seed(plan.master_seed, k), base_hp, log_path);
      save_checkpoint(ckpt_path, r.checkpoint);
      current = std::move(r.checkpoint);
    } catch (const std::exception& e) {
      throw std::runtime_error("phase " + std::to_string(k + 1) + " (" + phase.name + "): " + e.what());
    }
    result.checkpoints.push_back(ckpt_path);
    result.logs.push_back(log_path);
  }
  result.final_checkpoint = *current;
  return result;
}

}  // namespace binyard
