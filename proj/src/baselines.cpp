#include "binyard/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "binyard/categorical.hpp"

namespace binyard {

void AnalyticConfig::validate(const PlantConfig& plant) const {
  if (!(tolerance >= 0)) throw std::invalid_argument("analytic: tolerance must be >= 0");
  for (const auto& c : plant.containers)
    if (!(c.ideal_volume < emergency_volume && emergency_volume < c.max_volume))
      throw std::invalid_argument("analytic: emergency volume must lie between ideal and max volume of container " +
                                  std::to_string(c.id));
}

int analytic_action(const EnvState& s, const EnvConfig& c, const AnalyticConfig& ac) {
  const auto mask = action_mask(s, c);
  const int n = c.n_containers();

  int emergency = 0;
  for (int i = 1; i <= n; ++i) {
    if (!mask[i] || s.volumes[i - 1] < ac.emergency_volume) continue;
    if (emergency == 0 || s.volumes[i - 1] > s.volumes[emergency - 1]) emergency = i;
  }
  if (emergency) return emergency;

  int precise = 0;
  double best = 0.0;
  for (int i = 1; i <= n; ++i) {
    if (!mask[i]) continue;
    const double d = std::fabs(s.volumes[i - 1] - c.plant.containers[i - 1].ideal_volume);
    if (d > ac.tolerance) continue;
    if (precise == 0 || d < best) {
      precise = i;
      best = d;
    }
  }
  return precise;
}

bool analytic_safety_margin_holds(const EnvConfig& c, const AnalyticConfig& ac) {
  for (int i = 0; i < c.n_containers(); ++i) {
    const double worst = c.alpha_per_step(i) + 4.0 * c.sigma_per_step(i);
    if (!(worst < c.plant.containers[i].max_volume - ac.emergency_volume)) return false;
  }
  return true;
}

int do_nothing_action() { return 0; }

int random_action(const std::vector<bool>& mask, Rng& rng) {
  std::vector<int> allowed;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) allowed.push_back(static_cast<int>(i));
  if (allowed.empty()) return 0;
  std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
  return allowed[pick(rng)];
}

PolicyAgent::PolicyAgent(const PolicyCheckpoint& ckpt, bool use_mask)
    : policy_(ckpt.policy_network()), use_mask_(use_mask) {}

int PolicyAgent::act(const EnvState&, const Observation& obs, const std::vector<bool>& mask, const EnvConfig&) {
  const auto logits = forward(policy_.spec, policy_.params, obs);
  const Categorical dist(logits, use_mask_ ? mask : std::vector<bool>{});
  return dist.mode();
}

std::unique_ptr<Agent> make_agent(const std::string& kind, std::uint64_t seed, const AnalyticConfig& ac) {
  if (kind == "analytic") return std::make_unique<AnalyticAgent>(ac);
  if (kind == "do-nothing") return std::make_unique<DoNothingAgent>();
  if (kind == "random") return std::make_unique<RandomAgent>(seed);
  throw std::invalid_argument("unknown agent kind '" + kind + "' (expected analytic, do-nothing or random)");
}

}  // namespace binyard
