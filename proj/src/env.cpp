#include "binyard/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace binyard {

std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::Zeros: return "zeros";
    case InitMode::Phase1: return "phase1";
    case InitMode::Uniform: return "uniform";
  }
  return "?";
}

InitMode init_mode_from_string(const std::string& s) {
  if (s == "zeros") return InitMode::Zeros;
  if (s == "phase1") return InitMode::Phase1;
  if (s == "uniform") return InitMode::Uniform;
  throw std::invalid_argument("unknown init_mode '" + s + "'");
}

void EnvConfig::validate() const {
  plant.validate();
  reward_spec.validate();
  if (!(timestep_seconds > 0)) throw std::invalid_argument("env config: timestep_seconds must be > 0");
  if (episode_length < 1) throw std::invalid_argument("env config: episode_length must be >= 1");
}

double EnvConfig::alpha_per_step(int ci) const {
  return plant.containers[ci].alpha * (timestep_seconds / 60.0);
}

double EnvConfig::sigma_per_step(int ci) const {
  return plant.containers[ci].noise_sigma * std::sqrt(timestep_seconds / 60.0);
}

double EnvState::pu_free_in(int j) const {
  const auto& belts = belt_busy[j];
  return *std::min_element(belts.begin(), belts.end());
}

Observation make_observation(const EnvState& s, const EnvConfig& c) {
  const int n = c.n_containers();
  const int m = c.plant.n_pus();
  Observation obs;
  obs.reserve(c.observation_dim());
  for (int i = 0; i < n; ++i) obs.push_back(s.volumes[i] / c.plant.containers[i].max_volume);
  for (int j = 0; j < m; ++j) obs.push_back(s.pu_free_in(j) / c.timestep_seconds / kPuHorizonSteps);
  for (int i = 0; i < n; ++i) obs.push_back(s.emptying_flags[i] ? 1.0 : 0.0);
  for (int i = 0; i < n; ++i) obs.push_back(s.last_rewards[i]);
  for (int i = 0; i < n; ++i) obs.push_back(c.plant.containers[i].ideal_volume / c.plant.containers[i].max_volume);
  return obs;
}

EnvState reset_state(const EnvConfig& c, std::uint64_t seed) {
  const int n = c.n_containers();
  EnvState s;
  s.rng.seed(seed);
  s.volumes.assign(n, 0.0);
  s.emptying_flags.assign(n, false);
  s.last_rewards.assign(n, 0.0);
  s.belt_busy.clear();
  for (const auto& pu : c.plant.pus) s.belt_busy.emplace_back(pu.belt_count, 0.0);
  s.step_index = 0;

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  switch (c.init_mode) {
    case InitMode::Zeros:
      break;
    case InitMode::Uniform:
      for (int i = 0; i < n; ++i) s.volumes[i] = u01(s.rng) * c.plant.containers[i].ideal_volume;
      break;
    case InitMode::Phase1: {
      // k of n containers start within one episode's worth of drift below their ideal.
      const int k_min = (8 * n + 10) / 11;
      const int k = k_min + static_cast<int>(u01(s.rng) * (n - k_min + 1));
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), s.rng);
      std::vector<bool> near(n, false);
      for (int r = 0; r < std::min(k, n); ++r) near[order[r]] = true;
      for (int i = 0; i < n; ++i) {
        const double ideal = c.plant.containers[i].ideal_volume;
        if (near[i]) {
          const double hi = c.episode_length * c.alpha_per_step(i);
          const double lo = std::min(1.0, hi);
          s.volumes[i] = std::max(0.0, ideal - (lo + u01(s.rng) * (hi - lo)));
        } else {
          s.volumes[i] = u01(s.rng) * 0.5 * ideal;
        }
      }
      break;
    }
  }
  return s;
}

namespace {

// (PU index, belt index) of the first free belt among the container's allowed PUs.
std::optional<std::pair<int, int>> free_belt(const EnvState& s, const EnvConfig& c, int ci) {
  for (int pu_id : c.plant.containers[ci].allowed_pus) {
    const auto j = c.plant.pu_index(pu_id);
    if (!j) continue;
    const auto& belts = s.belt_busy[*j];
    for (int k = 0; k < static_cast<int>(belts.size()); ++k)
      if (belts[k] <= 0.0) return std::make_pair(*j, k);
  }
  return std::nullopt;
}

}  // namespace

std::vector<bool> action_mask(const EnvState& s, const EnvConfig& c) {
  const int n = c.n_containers();
  std::vector<bool> mask(n + 1, false);
  mask[0] = true;
  for (int i = 0; i < n; ++i) {
    if (!(s.volumes[i] > 0.0)) continue;
    mask[i + 1] = !c.pu_constrained || free_belt(s, c, i).has_value();
  }
  return mask;
}

StepOutcome step(EnvState& s, int action, const EnvConfig& c) {
  const int n = c.n_containers();
  if (action < 0 || action > n)
    throw std::out_of_range("step: action " + std::to_string(action) + " outside [0, " + std::to_string(n) + "]");

  // One standard normal per container every step, whatever the action, so that
  // different policies see the same noise stream under the same seed.
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = gauss(s.rng);

  StepOutcome out;
  StepInfo& info = out.info;
  const std::vector<double> before = s.volumes;

  std::optional<std::pair<int, int>> belt;
  if (action > 0) {
    const int ci = action - 1;
    info.acted_container = action;
    if (s.volumes[ci] > 0.0) {
      if (c.pu_constrained) {
        belt = free_belt(s, c, ci);
        info.action_success = belt.has_value();
      } else {
        info.action_success = true;
      }
    }
  }

  // Jobs already running progress by one step.
  for (auto& belts : s.belt_busy)
    for (double& t : belts) t = std::max(0.0, t - c.timestep_seconds);

  std::fill(s.emptying_flags.begin(), s.emptying_flags.end(), false);
  const int emptied = info.action_success ? action - 1 : -1;
  if (emptied >= 0) {
    const int pj = belt ? belt->first : *c.plant.pu_index(c.plant.containers[emptied].allowed_pus.front());
    const double v = before[emptied];
    info.pu_assigned = c.plant.pus[pj].id;
    info.emptied_volume = v;
    info.busy_seconds = processing_duration(v, c.plant.pair_params(emptied, pj));
    if (belt) s.belt_busy[belt->first][belt->second] = info.busy_seconds;
    s.emptying_flags[emptied] = true;
  }

  for (int i = 0; i < n; ++i) {
    if (i == emptied) {
      s.volumes[i] = 0.0;
    } else {
      s.volumes[i] = fill_step(before[i], c.alpha_per_step(i), c.sigma_per_step(i) * z[i], !c.stochastic_fill);
    }
    if (s.volumes[i] > c.plant.containers[i].max_volume) ++info.overflow_count;
  }

  std::vector<double> ideals(n);
  for (int i = 0; i < n; ++i) ideals[i] = c.plant.containers[i].ideal_volume;

  TransitionFacts facts{action, info.action_success, before, s.volumes, ideals, info.overflow_count > 0};
  ComposedReward r = compose_reward(facts, c.reward_spec);
  out.reward = r.total;
  s.last_rewards = r.per_container;
  out.per_container_rewards = std::move(r.per_container);

  ++s.step_index;
  out.terminated = !c.eval_mode && info.overflow_count > 0;
  out.truncated = s.step_index >= c.episode_length;
  out.observation = make_observation(s, c);
  return out;
}

Env::Env(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  state_ = reset_state(config_, 0);
}

Observation Env::reset(std::uint64_t seed) {
  state_ = reset_state(config_, seed);
  return make_observation(state_, config_);
}

StepOutcome Env::step(int action) { return binyard::step(state_, action, config_); }

}  // namespace binyard
