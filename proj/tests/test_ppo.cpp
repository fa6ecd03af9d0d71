#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "binyard/categorical.hpp"
#include "binyard/csv.hpp"
#include "binyard/ppo.hpp"

using namespace binyard;
namespace fs = std::filesystem;

namespace {

// One container routed to one PU; ideal reached after 40 steps.
EnvConfig micro_env() {
  EnvConfig c;
  ContainerSpec s;
  s.id = 1;
  s.ideal_volume = 20.0;
  s.alpha = 0.5;
  s.noise_sigma = 0.05;
  s.allowed_pus = {1};
  c.plant.containers = {s};
  PUSpec pu;
  pu.id = 1;
  c.plant.pus = {pu};
  c.timestep_seconds = 60.0;
  c.episode_length = 50;
  c.stochastic_fill = false;
  c.pu_constrained = false;
  c.init_mode = InitMode::Uniform;
  c.reward_spec = RewardSpec::for_kind(RewardKind::Custom);
  c.validate();
  return c;
}

EnvConfig small_env() {
  EnvConfig c;
  c.plant = reduced_plant();
  c.episode_length = 40;
  c.init_mode = InitMode::Uniform;
  c.reward_spec = RewardSpec::for_kind(RewardKind::Precision);
  return c;
}

RolloutBuffer hand_buffer(const std::vector<double>& r, const std::vector<double>& v, const std::vector<double>& nv,
                          const std::vector<bool>& term, const std::vector<bool>& end) {
  RolloutBuffer b;
  b.rewards = r;
  b.values = v;
  b.next_values = nv;
  b.terminated = term;
  b.episode_end = end;
  b.actions.assign(r.size(), 0);
  return b;
}

std::vector<double> brute_gae(const RolloutBuffer& b, double g, double l) {
  const std::size_t n = b.size();
  std::vector<double> delta(n), adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    delta[t] = b.rewards[t] + (b.terminated[t] ? 0.0 : g * b.next_values[t]) - b.values[t];
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += w * delta[k];
      if (b.episode_end[k]) break;
      w *= g * l;
    }
  }
  return adv;
}

double mean_eval_reward(const PolicyCheckpoint& ck, const EnvConfig& c, int episodes, std::uint64_t seed,
                        bool greedy) {
  const Network pol = ck.policy_network();
  Rng rng(seed);
  std::vector<double> totals;
  double sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Env env(c);
    auto obs = env.reset(derive_seed(seed, e));
    double total = 0.0;
    for (;;) {
      const Categorical d(forward(pol.spec, pol.params, obs));
      const auto out = env.step(greedy ? d.mode() : d.sample(rng));
      total += out.reward;
      obs = out.observation;
      if (out.terminated || out.truncated) break;
    }
    sum += total;
  }
  return sum / episodes;
}

std::vector<double> eval_rewards(const PolicyCheckpoint& ck, const EnvConfig& c, int episodes, std::uint64_t seed,
                                 bool greedy) {
  std::vector<double> out;
  for (int e = 0; e < episodes; ++e) out.push_back(mean_eval_reward(ck, c, 1, derive_seed(seed, e), greedy));
  return out;
}

// Two-sided 1% critical values of Student's t for df = 1..30.
double t_critical_01(double df) {
  static const double table[] = {63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499, 3.355, 3.250, 3.169,
                                 3.106,  3.055, 3.012, 2.977, 2.947, 2.921, 2.898, 2.878, 2.861, 2.845,
                                 2.831,  2.819, 2.807, 2.797, 2.787, 2.779, 2.771, 2.763, 2.756, 2.750};
  const int k = std::max(1, static_cast<int>(std::floor(df)));
  return k > 30 ? 2.750 : table[k - 1];
}

}  // namespace

TEST_CASE("gae examples") {
  auto b = hand_buffer({1, 1}, {0, 0}, {0, 0}, {false, true}, {false, true});
  compute_gae(b, 1.0, 1.0);
  CHECK(b.advantages == std::vector<double>{2.0, 1.0});
  CHECK(b.returns == std::vector<double>{2.0, 1.0});

  auto c = hand_buffer({1.0, -2.0, 0.5}, {0.3, 0.1, 0.7}, {0.1, 0.7, 0.9}, {false, false, false},
                       {false, false, true});
  compute_gae(c, 0.9, 0.0);
  for (int t = 0; t < 3; ++t)
    CHECK(c.advantages[t] == doctest::Approx(c.rewards[t] + 0.9 * c.next_values[t] - c.values[t]).epsilon(1e-15));

  compute_gae(c, 1e-300, 0.95);
  for (int t = 0; t < 3; ++t) CHECK(c.advantages[t] == doctest::Approx(c.rewards[t] - c.values[t]).epsilon(1e-12));
}

TEST_CASE("gae matches a brute-force double loop") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r, v, nv;
    std::vector<bool> term, end;
    const int episodes = 1 + int(rng() % 4);
    for (int e = 0; e < episodes; ++e) {
      const int len = 1 + int(rng() % 10);
      const bool ends_terminal = rng() & 1;
      for (int t = 0; t < len; ++t) {
        r.push_back(u(rng));
        v.push_back(u(rng));
        nv.push_back(u(rng));
        term.push_back(t + 1 == len && ends_terminal);
        end.push_back(t + 1 == len);
      }
    }
    // keep next_values consistent inside episodes
    for (std::size_t t = 0; t + 1 < r.size(); ++t)
      if (!end[t]) nv[t] = v[t + 1];
    auto b = hand_buffer(r, v, nv, term, end);
    const double g = 0.5 + 0.5 * (rng() % 1000) / 1000.0, l = (rng() % 1001) / 1000.0;
    compute_gae(b, g, l);
    const auto oracle = brute_gae(b, g, l);
    for (std::size_t t = 0; t < b.size(); ++t) {
      CHECK(std::fabs(b.advantages[t] - oracle[t]) <= 1e-10);
      CHECK(b.returns[t] == doctest::Approx(b.advantages[t] + b.values[t]));
    }
  }
}

TEST_CASE("advantage normalization") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(3.0, 7.0);
  std::vector<double> a(2048);
  for (auto& x : a) x = z(rng);
  normalize_advantages(a);
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  var /= a.size();
  CHECK(std::fabs(mean) < 1e-10);
  CHECK(std::fabs(var - 1.0) < 1e-6);
  std::vector<double> flat(10, 4.0);
  normalize_advantages(flat);
  for (double x : flat) CHECK(x == 0.0);
}

TEST_CASE("collection length, determinism and bootstrap values") {
  const auto c = small_env();
  const auto ck = fresh_checkpoint(c, 1);
  const auto pol = ck.policy_network(), val = ck.value_network();
  auto run = [&] {
    RolloutCollector col(c, 77);
    Rng rng(5);
    return col.collect(pol, val, 300, rng);
  };
  const auto a = run(), b = run();
  CHECK(a.size() == 300);
  CHECK(a.observations.size() == 300u * c.observation_dim());
  CHECK(a.actions == b.actions);
  CHECK(a.rewards == b.rewards);
  CHECK(a.observations == b.observations);
  CHECK(a.log_probs == b.log_probs);
  CHECK(a.episode_end.back());
  // 40-step episodes in eval-less training: ends at truncation or termination
  int ended = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a.terminated[t]) CHECK(a.episode_end[t]);
    if (!a.episode_end[t]) CHECK(a.next_values[t] == a.values[t + 1]);
    ended += a.episode_end[t];
  }
  CHECK(ended >= 300 / 40);
  CHECK(a.episode_rewards.size() == a.episode_lengths.size());

  RolloutCollector col(c, 77);
  Rng rng(5);
  CHECK(col.collect(pol, val, 2048, rng).size() == 2048);
}

TEST_CASE("masked collection never emits a masked action") {
  auto c = small_env();
  c.episode_length = 600;
  c.eval_mode = true;
  const auto ck = fresh_checkpoint(c, 2);
  RolloutCollector col(c, 3, true);
  Rng rng(1);
  const auto b = col.collect(ck.policy_network(), ck.value_network(), 3000, rng);
  int blocked_steps = 0;
  for (std::size_t t = 0; t < b.size(); ++t) {
    const auto m = b.mask(t);
    REQUIRE(m.size() == std::size_t(c.n_actions()));
    CHECK(m[b.actions[t]]);
    blocked_steps += std::count(m.begin(), m.end(), false) > 0;
  }
  CHECK(blocked_steps > 0);
}

TEST_CASE("update behaviour") {
  const auto c = small_env();
  const auto ck = fresh_checkpoint(c, 11);
  RolloutCollector col(c, 12);
  Rng rng(13);
  auto buf = col.collect(ck.policy_network(), ck.value_network(), 512, rng);
  compute_gae(buf, 0.99, 0.95);

  auto fresh = [&] {
    Network p = ck.policy_network(), v = ck.value_network();
    Optimizers o{AdamState(p.params.size()), AdamState(v.params.size())};
    return std::tuple{p, v, o};
  };

  SUBCASE("freeze policy") {
    auto [p, v, o] = fresh();
    PPOHyperparams hp;
    hp.freeze_policy = true;
    Rng r(1);
    ppo_update(buf, p, v, o, hp, r);
    CHECK(checksum(p.params.values) == checksum(ck.policy_params));
    CHECK(checksum(v.params.values) != checksum(ck.value_params));
  }
  SUBCASE("freeze value") {
    auto [p, v, o] = fresh();
    PPOHyperparams hp;
    hp.freeze_value = true;
    Rng r(1);
    ppo_update(buf, p, v, o, hp, r);
    CHECK(p.params.values != ck.policy_params);
    CHECK(v.params.values == ck.value_params);
  }
  SUBCASE("first minibatch sees identical old and new policies") {
    auto [p, v, o] = fresh();
    PPOHyperparams hp;
    hp.epochs_per_update = 1;
    Rng r(1);
    const auto s = ppo_update(buf, p, v, o, hp, r);
    CHECK(std::fabs(s.first_minibatch_kl) < 1e-12);
    CHECK(s.first_minibatch_clip_fraction == 0.0);
    CHECK(s.epochs_run == 1);
    CHECK(std::isfinite(s.policy_loss));
    CHECK(std::isfinite(s.value_loss));
  }
  SUBCASE("tiny target kl stops after one epoch") {
    auto [p, v, o] = fresh();
    PPOHyperparams hp;
    hp.target_kl = 1e-9;
    Rng r(1);
    const auto s = ppo_update(buf, p, v, o, hp, r);
    CHECK(s.epochs_run <= 1);
    CHECK(s.stopped_on_kl);
    CHECK(s.approx_kl > 1e-9);
  }
  SUBCASE("without target kl all epochs run") {
    auto [p, v, o] = fresh();
    PPOHyperparams hp;
    Rng r(1);
    const auto s = ppo_update(buf, p, v, o, hp, r);
    CHECK(s.epochs_run == 10);
    CHECK_FALSE(s.stopped_on_kl);
    CHECK(s.approx_kl >= 0.0);
  }
  SUBCASE("updates are deterministic") {
    auto [p1, v1, o1] = fresh();
    auto [p2, v2, o2] = fresh();
    PPOHyperparams hp;
    Rng r1(4), r2(4);
    ppo_update(buf, p1, v1, o1, hp, r1);
    ppo_update(buf, p2, v2, o2, hp, r2);
    CHECK(p1.params.values == p2.params.values);
    CHECK(v1.params.values == v2.params.values);
  }
  SUBCASE("non-finite rewards abort") {
    auto bad = buf;
    bad.rewards[3] = std::nan("");
    compute_gae(bad, 0.99, 0.95);
    auto [p, v, o] = fresh();
    Rng r(1);
    CHECK_THROWS_AS(ppo_update(bad, p, v, o, PPOHyperparams{}, r), std::runtime_error);
  }
}

TEST_CASE("hyperparameter validation") {
  PPOHyperparams hp;
  hp.validate();
  CHECK(hp.gamma == 0.99);
  CHECK(hp.gae_lambda == 0.95);
  CHECK(hp.clip_ratio == 0.2);
  CHECK(hp.policy_lr == 3e-4);
  CHECK(hp.value_lr == 3e-4);
  CHECK(hp.steps_per_update == 2048);
  CHECK(hp.epochs_per_update == 10);
  CHECK(hp.minibatch_size == 64);
  CHECK(hp.entropy_coef == 0.0);
  hp.freeze_policy = hp.freeze_value = true;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = PPOHyperparams{};
  hp.gamma = 0.0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = PPOHyperparams{};
  hp.gae_lambda = 1.5;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
}

TEST_CASE("train cycles, budget errors and determinism") {
  CHECK(update_cycles(500000, 2048) == 245);
  CHECK(update_cycles(1500000, 2048) == 733);
  CHECK(update_cycles(2048, 2048) == 1);
  CHECK(update_cycles(2049, 2048) == 2);

  const auto c = small_env();
  PPOHyperparams hp;
  hp.steps_per_update = 256;
  hp.epochs_per_update = 2;
  CHECK_THROWS_AS(train(c, std::nullopt, hp, 100, 1, "x"), std::invalid_argument);

  const fs::path dir = fs::temp_directory_path() / "binyard_test_ppo";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto a = train(c, std::nullopt, hp, 600, 9, "p", dir / "log.csv");
  const auto b = train(c, std::nullopt, hp, 600, 9, "p");
  CHECK(a.curve.size() == 3);
  CHECK(a.checkpoint.timesteps == 768);
  CHECK(a.checkpoint.policy_params == b.checkpoint.policy_params);
  CHECK(a.checkpoint.value_params == b.checkpoint.value_params);
  const auto log = read_csv(dir / "log.csv");
  CHECK(log.rows.size() == 3);
  for (const char* col : {"update_idx", "timesteps", "mean_ep_reward", "mean_ep_len", "policy_loss", "value_loss",
                          "approx_kl", "clip_frac"})
    CHECK_NOTHROW(log.column(col));

  const auto other = train(c, std::nullopt, hp, 600, 10, "p");
  CHECK(other.checkpoint.policy_params != a.checkpoint.policy_params);

  auto wrong = small_env();
  wrong.plant = default_plant();
  CHECK_THROWS_AS(train(wrong, a.checkpoint, hp, 600, 1, "p"), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("learning sanity on a one-container micro environment") {
  const auto c = micro_env();
  const auto init = fresh_checkpoint(c, 3);
  const auto trained = train(c, init, PPOHyperparams{}, 100000, 3, "micro").checkpoint;
  const auto before = eval_rewards(init, c, 20, 555, false);
  const auto after = eval_rewards(trained, c, 20, 555, false);
  auto stats = [](const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double s2 = 0.0;
    for (double v : x) s2 += (v - m) * (v - m);
    return std::pair{m, s2 / (x.size() - 1)};
  };
  const auto [m0, v0] = stats(before);
  const auto [m1, v1] = stats(after);
  const double se2 = v0 / 20 + v1 / 20;
  const double t = (m1 - m0) / std::sqrt(se2);
  const double df = se2 * se2 / ((v0 / 20) * (v0 / 20) / 19 + (v1 / 20) * (v1 / 20) / 19);
  MESSAGE("random " << m0 << " trained " << m1 << " t=" << t << " df=" << df);
  CHECK(m1 > m0);
  CHECK(t > t_critical_01(df));
}
