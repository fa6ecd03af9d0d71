#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "binyard/checkpoint.hpp"
#include "binyard/env.hpp"
#include "binyard/mlp.hpp"
#include "binyard/optimizer.hpp"

namespace binyard {

struct PPOHyperparams {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double policy_lr = 3e-4;
  double value_lr = 3e-4;
  int steps_per_update = 2048;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  std::optional<double> target_kl;
  bool freeze_policy = false;
  bool freeze_value = false;

  void validate() const;
};

/// One batch of on-policy experience. Per-step arrays all have size(); the
/// flat observation/logit arrays have size() * obs_dim and size() * n_actions.
struct RolloutBuffer {
  int obs_dim = 0;
  int n_actions = 0;
  std::vector<double> observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> old_logits;
  std::vector<bool> masks;  // empty unless collected with masking
  std::vector<double> rewards;
  std::vector<double> values;
  /// V(s_{t+1}) for bootstrapping; meaningless where terminated.
  std::vector<double> next_values;
  std::vector<bool> terminated;
  /// Last transition of an episode, or of the buffer.
  std::vector<bool> episode_end;
  std::vector<double> advantages;
  std::vector<double> returns;

  // Completed-episode statistics gathered while collecting.
  std::vector<double> episode_rewards;
  std::vector<int> episode_lengths;

  std::size_t size() const { return actions.size(); }
  std::span<const double> observation(std::size_t t) const {
    return std::span<const double>(observations).subspan(t * obs_dim, obs_dim);
  }
  std::span<const double> logits(std::size_t t) const {
    return std::span<const double>(old_logits).subspan(t * n_actions, n_actions);
  }
  std::vector<bool> mask(std::size_t t) const;
};

/// Steps one environment across update cycles, resetting it with derived
/// seeds whenever an episode terminates or is truncated.
class RolloutCollector {
 public:
  RolloutCollector(EnvConfig config, std::uint64_t seed, bool use_mask = false);

  RolloutBuffer collect(const Network& policy, const Network& value, int n_steps, Rng& rng);

  const Env& env() const { return env_; }

 private:
  void start_episode();

  Env env_;
  std::uint64_t seed_;
  bool use_mask_;
  std::uint64_t episodes_started_ = 0;
  Observation obs_;
  double episode_reward_ = 0.0;
  int episode_length_ = 0;
};

/// Generalized advantage estimation. Fills buffer.advantages and buffer.returns.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

/// Shift to zero mean and scale to unit (population) variance.
void normalize_advantages(std::vector<double>& adv);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  int epochs_run = 0;
  double first_minibatch_kl = 0.0;
  double first_minibatch_clip_fraction = 0.0;
  bool stopped_on_kl = false;
};

struct Optimizers {
  AdamState policy;
  AdamState value;
};

/// Clipped-surrogate policy step and value regression over the buffer.
UpdateStats ppo_update(const RolloutBuffer& buffer, Network& policy, Network& value, Optimizers& opt,
                       const PPOHyperparams& hp, Rng& rng);

struct TrainLogRow {
  int update_idx = 0;
  std::uint64_t timesteps = 0;
  std::optional<double> mean_ep_reward;
  std::optional<double> mean_ep_len;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
  double clip_frac = 0.0;
  int epochs_run = 0;
};

struct TrainResult {
  PolicyCheckpoint checkpoint;
  std::vector<TrainLogRow> curve;
};

/// Default tanh MLP pair (64-64) sized for `config`, output layer of the
/// policy scaled down so the initial policy is near uniform.
PolicyCheckpoint fresh_checkpoint(const EnvConfig& config, std::uint64_t seed);

std::uint64_t update_cycles(std::uint64_t budget_timesteps, int steps_per_update);

/// Runs ceil(budget / steps_per_update) collect/update cycles starting from
/// `initial` (or a fresh init). Writes the per-update CSV to `log_path` when set.
TrainResult train(const EnvConfig& config, const std::optional<PolicyCheckpoint>& initial, const PPOHyperparams& hp,
                  std::uint64_t budget_timesteps, std::uint64_t seed, const std::string& provenance,
                  const std::optional<std::filesystem::path>& log_path = std::nullopt);

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows);

}  // namespace binyard
