#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "binyard/checkpoint.hpp"
#include "binyard/env.hpp"

namespace binyard {

/// Anything that picks an action from the current environment view.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual int act(const EnvState& state, const Observation& obs, const std::vector<bool>& mask,
                  const EnvConfig& config) = 0;
  /// Called before each rollout with that rollout's seed.
  virtual void begin_episode(std::uint64_t /*seed*/) {}
};

struct AnalyticConfig {
  double emergency_volume = 37.0;
  double tolerance = 0.5;

  /// ideal < emergency < max for every container.
  void validate(const PlantConfig& plant) const;
};

/// Rule-based controller: empty anything at or above the emergency volume
/// (fullest first), otherwise a container within tolerance of its ideal
/// (closest first), otherwise do nothing. Only containers with a free allowed
/// belt are considered; ties go to the lowest container id.
int analytic_action(const EnvState& state, const EnvConfig& config, const AnalyticConfig& ac);

/// max over containers of (alpha + 4 sigma) per step is below max_volume - emergency_volume.
bool analytic_safety_margin_holds(const EnvConfig& config, const AnalyticConfig& ac);

int do_nothing_action();

/// Uniform over the true entries of `mask`.
int random_action(const std::vector<bool>& mask, Rng& rng);

class AnalyticAgent final : public Agent {
 public:
  explicit AnalyticAgent(AnalyticConfig ac = {}) : ac_(ac) {}
  std::string name() const override { return "analytic"; }
  int act(const EnvState& s, const Observation&, const std::vector<bool>&, const EnvConfig& c) override {
    return analytic_action(s, c, ac_);
  }

 private:
  AnalyticConfig ac_;
};

class DoNothingAgent final : public Agent {
 public:
  std::string name() const override { return "do-nothing"; }
  int act(const EnvState&, const Observation&, const std::vector<bool>&, const EnvConfig&) override {
    return do_nothing_action();
  }
};

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string name() const override { return "random"; }
  void begin_episode(std::uint64_t seed) override { rng_.seed(derive_seed(seed_, seed)); }
  int act(const EnvState&, const Observation&, const std::vector<bool>& mask, const EnvConfig&) override {
    return random_action(mask, rng_);
  }

 private:
  std::uint64_t seed_;
  Rng rng_;
};

/// Greedy (most probable) admissible action of a trained policy network.
class PolicyAgent final : public Agent {
 public:
  explicit PolicyAgent(const PolicyCheckpoint& ckpt, bool use_mask = true);
  std::string name() const override { return "policy"; }
  int act(const EnvState&, const Observation& obs, const std::vector<bool>& mask, const EnvConfig&) override;

 private:
  Network policy_;
  bool use_mask_;
};

/// "analytic", "do-nothing" or "random". Throws std::invalid_argument otherwise.
std::unique_ptr<Agent> make_agent(const std::string& kind, std::uint64_t seed, const AnalyticConfig& ac = {});

}  // namespace binyard
