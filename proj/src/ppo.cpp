#include "binyard/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "binyard/categorical.hpp"
#include "binyard/csv.hpp"

namespace binyard {

void PPOHyperparams::validate() const {
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("ppo: gamma must be in (0, 1]");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) throw std::invalid_argument("ppo: gae_lambda must be in [0, 1]");
  if (!(clip_ratio > 0)) throw std::invalid_argument("ppo: clip_ratio must be > 0");
  if (!(policy_lr > 0 && value_lr > 0)) throw std::invalid_argument("ppo: learning rates must be > 0");
  if (steps_per_update < 1 || epochs_per_update < 1 || minibatch_size < 1)
    throw std::invalid_argument("ppo: steps, epochs and minibatch size must be >= 1");
  if (freeze_policy && freeze_value) throw std::invalid_argument("ppo: cannot freeze both networks");
  if (target_kl && !(*target_kl > 0)) throw std::invalid_argument("ppo: target_kl must be > 0");
}

std::vector<bool> RolloutBuffer::mask(std::size_t t) const {
  if (masks.empty()) return {};
  const auto first = masks.begin() + static_cast<std::ptrdiff_t>(t * n_actions);
  return std::vector<bool>(first, first + n_actions);
}

RolloutCollector::RolloutCollector(EnvConfig config, std::uint64_t seed, bool use_mask)
    : env_(std::move(config)), seed_(seed), use_mask_(use_mask) {
  start_episode();
}

void RolloutCollector::start_episode() {
  obs_ = env_.reset(derive_seed(seed_, episodes_started_++));
  episode_reward_ = 0.0;
  episode_length_ = 0;
}

RolloutBuffer RolloutCollector::collect(const Network& policy, const Network& value, int n_steps, Rng& rng) {
  const int obs_dim = env_.config().observation_dim();
  const int n_actions = env_.config().n_actions();
  if (policy.spec.input_dim != obs_dim || policy.spec.output_dim != n_actions || value.spec.input_dim != obs_dim)
    throw std::invalid_argument("collect_rollouts: network dimensions do not match the environment");

  RolloutBuffer b;
  b.obs_dim = obs_dim;
  b.n_actions = n_actions;
  const std::size_t n = static_cast<std::size_t>(n_steps);
  b.observations.reserve(n * obs_dim);
  b.old_logits.reserve(n * n_actions);

  ForwardCache pc, vc;
  for (int t = 0; t < n_steps; ++t) {
    std::vector<bool> mask;
    if (use_mask_) mask = env_.mask();
    const auto logits = forward(policy.spec, policy.params, obs_, pc);
    const double v = forward(value.spec, value.params, obs_, vc)[0];
    const Categorical dist(logits, mask);
    const int a = dist.sample(rng);

    b.observations.insert(b.observations.end(), obs_.begin(), obs_.end());
    b.old_logits.insert(b.old_logits.end(), logits.begin(), logits.end());
    if (use_mask_) b.masks.insert(b.masks.end(), mask.begin(), mask.end());
    b.actions.push_back(a);
    b.log_probs.push_back(dist.log_prob(a));
    b.values.push_back(v);

    StepOutcome out = env_.step(a);
    episode_reward_ += out.reward;
    ++episode_length_;
    b.rewards.push_back(out.reward);
    b.terminated.push_back(out.terminated);

    const bool done = out.terminated || out.truncated;
    const bool last = t + 1 == n_steps;
    b.episode_end.push_back(done || last);
    if (done) {
      b.next_values.push_back(out.terminated ? 0.0 : forward(value.spec, value.params, out.observation)[0]);
      b.episode_rewards.push_back(episode_reward_);
      b.episode_lengths.push_back(episode_length_);
      start_episode();
    } else {
      obs_ = std::move(out.observation);
      // Filled from the next step's value estimate below, except at the buffer end.
      b.next_values.push_back(last ? forward(value.spec, value.params, obs_)[0] : 0.0);
    }
  }
  for (std::size_t t = 0; t + 1 < n; ++t)
    if (!b.episode_end[t]) b.next_values[t] = b.values[t + 1];
  return b;
}

void compute_gae(RolloutBuffer& b, double gamma, double lambda) {
  const std::size_t n = b.size();
  b.advantages.assign(n, 0.0);
  b.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double bootstrap = b.terminated[t] ? 0.0 : gamma * b.next_values[t];
    const double delta = b.rewards[t] + bootstrap - b.values[t];
    running = delta + (b.episode_end[t] ? 0.0 : gamma * lambda * running);
    b.advantages[t] = running;
    b.returns[t] = running + b.values[t];
  }
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= n;
  const double sd = std::sqrt(var);
  for (double& a : adv) a = sd > 0.0 ? (a - mean) / sd : 0.0;
}

namespace {

double mean_kl(const RolloutBuffer& b, const Network& policy) {
  double kl = 0.0;
  ForwardCache cache;
  for (std::size_t t = 0; t < b.size(); ++t) {
    const auto mask = b.mask(t);
    const Categorical old_dist(b.logits(t), mask);
    const Categorical new_dist(forward(policy.spec, policy.params, b.observation(t), cache), mask);
    kl += old_dist.kl_to(new_dist);
  }
  return b.size() ? kl / static_cast<double>(b.size()) : 0.0;
}

void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::runtime_error(std::string("ppo_update: non-finite ") + what);
}

}  // namespace

UpdateStats ppo_update(const RolloutBuffer& b, Network& policy, Network& value, Optimizers& opt,
                       const PPOHyperparams& hp, Rng& rng) {
  hp.validate();
  const std::size_t n = b.size();
  if (n == 0 || b.advantages.size() != n || b.returns.size() != n)
    throw std::invalid_argument("ppo_update: buffer has no computed advantages");
  if (opt.policy.m.size() != policy.params.size() || opt.value.m.size() != value.params.size())
    throw std::invalid_argument("ppo_update: optimizer state does not match networks");

  std::vector<double> adv = b.advantages;
  normalize_advantages(adv);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb = std::min<std::size_t>(hp.minibatch_size, n);

  UpdateStats stats;
  ForwardCache pc, vc;
  std::vector<double> dlogits(b.n_actions);
  bool first_minibatch = true;

  for (int epoch = 0; epoch < hp.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double pl_sum = 0.0, vl_sum = 0.0, ent_sum = 0.0;
    std::size_t clipped = 0;

    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t end = std::min(n, start + mb);
      const double inv = 1.0 / static_cast<double>(end - start);
      policy.params.zero_grad();
      value.params.zero_grad();
      double mb_kl = 0.0;
      std::size_t mb_clipped = 0;

      for (std::size_t k = start; k < end; ++k) {
        const std::size_t t = order[k];
        const auto obs = b.observation(t);

        if (!hp.freeze_policy) {
          const auto mask = b.mask(t);
          const auto logits = forward(policy.spec, policy.params, obs, pc);
          const Categorical dist(logits, mask);
          const int a = b.actions[t];
          const double logp = dist.log_prob(a);
          const double ratio = std::exp(logp - b.log_probs[t]);
          const double A = adv[t];
          const double lo = 1.0 - hp.clip_ratio, hi = 1.0 + hp.clip_ratio;
          const double surr = std::min(ratio * A, std::clamp(ratio, lo, hi) * A);
          const double H = dist.entropy();
          check_finite(surr, "policy loss");
          pl_sum += -surr;
          ent_sum += H;
          if (ratio < lo || ratio > hi) {
            ++clipped;
            ++mb_clipped;
          }
          if (first_minibatch) mb_kl += b.log_probs[t] - logp;

          // d(-surr)/d logp is -ratio*A while the unclipped branch is active.
          const bool active = (A >= 0.0) ? ratio <= hi : ratio >= lo;
          const double g_logp = active ? -ratio * A * inv : 0.0;
          const auto p = dist.probs();
          const auto lp = dist.log_probs();
          for (int j = 0; j < b.n_actions; ++j) {
            double g = g_logp * ((j == a ? 1.0 : 0.0) - p[j]);
            if (hp.entropy_coef != 0.0 && p[j] > 0.0) g += hp.entropy_coef * inv * p[j] * (lp[j] + H);
            dlogits[j] = g;
          }
          backward(policy.spec, policy.params, pc, dlogits);
        }

        if (!hp.freeze_value) {
          const double v = forward(value.spec, value.params, obs, vc)[0];
          const double err = v - b.returns[t];
          check_finite(err, "value loss");
          vl_sum += err * err;
          const double g = 2.0 * err * inv;
          backward(value.spec, value.params, vc, std::span<const double>(&g, 1));
        }
      }

      if (first_minibatch) {
        stats.first_minibatch_kl = hp.freeze_policy ? 0.0 : mb_kl * inv;
        stats.first_minibatch_clip_fraction = static_cast<double>(mb_clipped) * inv;
        first_minibatch = false;
      }
      if (!hp.freeze_policy) {
        clip_grad_norm(policy.params.grads, hp.max_grad_norm);
        adam_update(policy.params.values, policy.params.grads, hp.policy_lr, opt.policy);
      }
      if (!hp.freeze_value) {
        clip_grad_norm(value.params.grads, hp.max_grad_norm);
        adam_update(value.params.values, value.params.grads, hp.value_lr, opt.value);
      }
    }

    const double dn = static_cast<double>(n);
    stats.policy_loss = pl_sum / dn;
    stats.value_loss = vl_sum / dn;
    stats.entropy = ent_sum / dn;
    stats.clip_fraction = static_cast<double>(clipped) / dn;
    stats.epochs_run = epoch + 1;
    stats.approx_kl = hp.freeze_policy ? 0.0 : mean_kl(b, policy);
    if (hp.target_kl && stats.approx_kl > *hp.target_kl) {
      stats.stopped_on_kl = true;
      break;
    }
  }
  return stats;
}

PolicyCheckpoint fresh_checkpoint(const EnvConfig& config, std::uint64_t seed) {
  PolicyCheckpoint c;
  c.policy_spec = MlpSpec{config.observation_dim(), {64, 64}, config.n_actions()};
  c.value_spec = MlpSpec{config.observation_dim(), {64, 64}, 1};
  Rng rng(derive_seed(seed, streams::kInit));
  ParamSet p, v;
  init_params(c.policy_spec, p, rng, 0.01);
  init_params(c.value_spec, v, rng, 1.0);
  c.policy_params = std::move(p.values);
  c.value_params = std::move(v.values);
  c.seed = seed;
  c.provenance = "init";
  return c;
}

std::uint64_t update_cycles(std::uint64_t budget, int steps_per_update) {
  if (steps_per_update < 1) throw std::invalid_argument("update_cycles: steps_per_update must be >= 1");
  const auto s = static_cast<std::uint64_t>(steps_per_update);
  return (budget + s - 1) / s;
}

TrainResult train(const EnvConfig& config, const std::optional<PolicyCheckpoint>& initial, const PPOHyperparams& hp,
                  std::uint64_t budget, std::uint64_t seed, const std::string& provenance,
                  const std::optional<std::filesystem::path>& log_path) {
  hp.validate();
  config.validate();
  if (budget < static_cast<std::uint64_t>(hp.steps_per_update))
    throw std::invalid_argument("train: budget " + std::to_string(budget) + " is smaller than steps_per_update " +
                                std::to_string(hp.steps_per_update));

  TrainResult result;
  PolicyCheckpoint ckpt = initial ? *initial : fresh_checkpoint(config, seed);
  ckpt.validate();
  if (ckpt.policy_spec.input_dim != config.observation_dim() || ckpt.policy_spec.output_dim != config.n_actions())
    throw std::invalid_argument("train: checkpoint expects " + std::to_string(ckpt.policy_spec.input_dim) +
                                " inputs / " + std::to_string(ckpt.policy_spec.output_dim) +
                                " actions, environment has " + std::to_string(config.observation_dim()) + " / " +
                                std::to_string(config.n_actions()));

  Network policy = ckpt.policy_network();
  Network value = ckpt.value_network();
  Optimizers opt{AdamState(policy.params.size()), AdamState(value.params.size())};
  RolloutCollector collector(config, derive_seed(seed, streams::kEnvEpisodes));
  Rng sample_rng(derive_seed(seed, streams::kPolicySampling));
  Rng minibatch_rng(derive_seed(seed, streams::kMinibatch));

  const std::uint64_t cycles = update_cycles(budget, hp.steps_per_update);
  std::uint64_t steps = 0;
  for (std::uint64_t u = 0; u < cycles; ++u) {
    RolloutBuffer buf = collector.collect(policy, value, hp.steps_per_update, sample_rng);
    compute_gae(buf, hp.gamma, hp.gae_lambda);
    const UpdateStats s = ppo_update(buf, policy, value, opt, hp, minibatch_rng);
    steps += buf.size();

    TrainLogRow row;
    row.update_idx = static_cast<int>(u);
    row.timesteps = steps;
    if (!buf.episode_rewards.empty()) {
      const double k = static_cast<double>(buf.episode_rewards.size());
      row.mean_ep_reward = std::accumulate(buf.episode_rewards.begin(), buf.episode_rewards.end(), 0.0) / k;
      row.mean_ep_len = std::accumulate(buf.episode_lengths.begin(), buf.episode_lengths.end(), 0.0) / k;
    }
    row.policy_loss = s.policy_loss;
    row.value_loss = s.value_loss;
    row.approx_kl = s.approx_kl;
    row.clip_frac = s.clip_fraction;
    row.epochs_run = s.epochs_run;
    result.curve.push_back(row);
  }

  ckpt.policy_params = policy.params.values;
  ckpt.value_params = value.params.values;
  ckpt.timesteps += steps;
  ckpt.seed = seed;
  ckpt.provenance = initial ? ckpt.provenance + ">" + provenance : provenance;
  result.checkpoint = std::move(ckpt);
  if (log_path) write_train_log(*log_path, result.curve);
  return result;
}

void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
  CsvWriter w(path, {"update_idx", "timesteps", "mean_ep_reward", "mean_ep_len", "policy_loss", "value_loss",
                     "approx_kl", "clip_frac", "epochs_run"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.update_idx), std::to_string(r.timesteps), format_optional(r.mean_ep_reward),
           format_optional(r.mean_ep_len), format_double(r.policy_loss), format_double(r.value_loss),
           format_double(r.approx_kl), format_double(r.clip_frac), std::to_string(r.epochs_run)});
  }
}

}  // namespace binyard
