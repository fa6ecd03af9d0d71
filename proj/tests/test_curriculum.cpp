#include <doctest.h>

#include <filesystem>

#include "binyard/curriculum.hpp"
#include "binyard/json_io.hpp"

using namespace binyard;
namespace fs = std::filesystem;

namespace {

struct Row {
  const char* name;
  std::uint64_t budget;
  double dt;
  int ep_len;
  RewardKind reward;
  bool stochastic;
  bool constrained;
  bool freeze_policy;
  bool has_kl;
};

// Table 1, written out independently of the library.
const Row kTable[] = {
    {"phase1", 1500000, 30.0, 25, RewardKind::Custom, false, false, false, false},
    {"phase2", 1000000, 30.0, 25, RewardKind::Precision, false, false, false, false},
    {"phase3", 1000000, 30.0, 25, RewardKind::PrecisionWithActionPenalty, false, false, false, false},
    {"phase4", 500000, 60.0, 600, RewardKind::Precision, true, true, true, false},
    {"phase5", 500000, 60.0, 600, RewardKind::Precision, true, true, false, true},
};

PPOHyperparams quick_hp() {
  PPOHyperparams hp;
  hp.steps_per_update = 128;
  hp.epochs_per_update = 2;
  hp.minibatch_size = 32;
  return hp;
}

}  // namespace

TEST_CASE("default plan matches the table field for field") {
  const auto plan = default_plan();
  REQUIRE(plan.phases.size() == 5);
  for (int k = 0; k < 5; ++k) {
    const auto& p = plan.phases[k];
    const auto& r = kTable[k];
    CAPTURE(k);
    CHECK(p.name == r.name);
    CHECK(p.budget_timesteps == r.budget);
    CHECK(p.timestep_seconds == r.dt);
    CHECK(p.episode_length_steps == r.ep_len);
    CHECK(p.reward_spec.kind == r.reward);
    CHECK(p.stochastic_fill == r.stochastic);
    CHECK(p.pu_constrained == r.constrained);
    CHECK(p.freeze_policy == r.freeze_policy);
    CHECK_FALSE(p.freeze_value);
    CHECK(p.target_kl.has_value() == r.has_kl);
  }
  CHECK(plan.phases[0].init_mode == InitMode::Phase1);
  CHECK(*plan.phases[4].target_kl == 0.01);
  CHECK(plan.total_budget() == 4500000);
}

TEST_CASE("shipped table1.json is the default plan") {
  const auto j = read_json_file(BINYARD_SOURCE_DIR "/configs/table1.json");
  const auto plan = plan_from_json(j);
  const auto def = default_plan();
  REQUIRE(plan.phases.size() == def.phases.size());
  for (std::size_t k = 0; k < plan.phases.size(); ++k) CHECK(plan.phases[k] == def.phases[k]);
  CHECK(to_json(def) == j);
}

TEST_CASE("dimensions are invariant across phases") {
  for (const auto& plant : {default_plant(), reduced_plant()}) {
    const auto plan = default_plan();
    const auto first = plan.phases[0].env_config(plant);
    for (const auto& p : plan.phases) {
      const auto c = p.env_config(plant);
      CHECK(c.observation_dim() == first.observation_dim());
      CHECK(c.n_actions() == first.n_actions());
    }
  }
}

TEST_CASE("phase validation and hyperparameters") {
  auto p = default_plan().phases[3];
  const auto hp = phase_hyperparams(p, PPOHyperparams{});
  CHECK(hp.freeze_policy);
  CHECK_FALSE(hp.target_kl);
  CHECK(phase_hyperparams(default_plan().phases[4], PPOHyperparams{}).target_kl == 0.01);
  p.freeze_value = true;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = default_plan().phases[0];
  p.budget_timesteps = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  const auto s = scaled(default_plan(), 0.001);
  CHECK(s.phases[0].budget_timesteps == 1500);
  CHECK(s.phases[3].budget_timesteps == 500);
  const auto capped = phase_hyperparams(s.phases[3], PPOHyperparams{});
  CHECK(capped.steps_per_update <= 500);
  CHECK(capped.minibatch_size <= capped.steps_per_update);
  CHECK(phase_seed(7, 0) != phase_seed(7, 1));
}

TEST_CASE("run_phase transfer behaviour") {
  const auto plant = reduced_plant();
  auto plan = scaled(default_plan(), 0.0005);
  const auto p1 = run_phase(plan.phases[0], plant, std::nullopt, 1, quick_hp()).checkpoint;
  CHECK(p1.provenance == "phase1");
  const auto p4 = run_phase(plan.phases[3], plant, p1, 2, quick_hp()).checkpoint;
  CHECK(checksum(p4.policy_params) == checksum(p1.policy_params));
  CHECK(checksum(p4.value_params) != checksum(p1.value_params));
  CHECK(p4.provenance == "phase1>phase4");

  const auto other = fresh_checkpoint(plan.phases[0].env_config(default_plant()), 3);
  CHECK_THROWS_AS(run_phase(plan.phases[1], plant, other, 4, quick_hp()), std::invalid_argument);
}

TEST_CASE("run_curriculum writes every phase and is reproducible") {
  const fs::path a = fs::temp_directory_path() / "binyard_test_cur_a";
  const fs::path b = fs::temp_directory_path() / "binyard_test_cur_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto plan = scaled(default_plan(), 0.0005);
  plan.master_seed = 17;
  const auto ra = run_curriculum(plan, reduced_plant(), quick_hp(), a);
  const auto rb = run_curriculum(plan, reduced_plant(), quick_hp(), b);
  CHECK(ra.checkpoints.size() == 5);
  CHECK(ra.logs.size() == 5);
  for (int k = 1; k <= 5; ++k) {
    const auto ck = "ckpt_phase" + std::to_string(k) + ".bin";
    CHECK(fs::exists(a / ck));
    CHECK(fs::exists(a / ("train_phase" + std::to_string(k) + ".csv")));
  }
  CHECK(encode_checkpoint(ra.final_checkpoint) == encode_checkpoint(rb.final_checkpoint));
  CHECK(ra.final_checkpoint.provenance == "phase1>phase2>phase3>phase4>phase5");
  const auto p3 = load_checkpoint(a / "ckpt_phase3.bin"), p4 = load_checkpoint(a / "ckpt_phase4.bin");
  CHECK(p3.policy_params == p4.policy_params);

  // a directory where the phase-2 checkpoint should go makes that phase fail
  fs::remove_all(a);
  fs::create_directories(a / "ckpt_phase2.bin");
  try {
    run_curriculum(plan, reduced_plant(), quick_hp(), a);
    FAIL("expected phase 2 to fail");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).rfind("phase 2 (phase2):", 0) == 0);
  }
  CHECK(fs::exists(a / "ckpt_phase1.bin"));
  CHECK_FALSE(fs::exists(a / "ckpt_phase3.bin"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("plan JSON round trip") {
  auto plan = scaled(default_plan(), 0.1);
  plan.master_seed = 99;
  plan.output_dir = "elsewhere";
  const auto back = plan_from_json(to_json(plan));
  CHECK(back.master_seed == 99);
  CHECK(back.output_dir == "elsewhere");
  for (std::size_t k = 0; k < 5; ++k) CHECK(back.phases[k] == plan.phases[k]);
}
