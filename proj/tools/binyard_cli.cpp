// binyard: simulate the sorting plant, train agents, evaluate them.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binyard/baselines.hpp"
#include "binyard/checkpoint.hpp"
#include "binyard/csv.hpp"
#include "binyard/curriculum.hpp"
#include "binyard/gradcheck.hpp"
#include "binyard/json_io.hpp"
#include "binyard/kernels.hpp"
#include "binyard/metrics.hpp"
#include "binyard/plant.hpp"
#include "binyard/ppo.hpp"

namespace fs = std::filesystem;
using namespace binyard;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t file_value = 0) {
  if (flag) return *flag;
  if (const char* env = std::getenv("BINYARD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("BINYARD_SEED is not an unsigned integer: ") + env);
    }
  }
  return file_value;
}

PlantConfig load_plant(const std::string& path) {
  return path.empty() ? default_plant() : plant_from_json(read_json_file(path));
}

CurriculumPlan load_plan(const std::string& path) {
  return path.empty() ? default_plan() : plan_from_json(read_json_file(path));
}

struct SimulateArgs {
  std::string plant, agent = "analytic", out = "out";
  int steps = 600;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& a) {
  const PlantConfig plant = load_plant(a.plant);
  const std::uint64_t seed = resolve_seed(a.seed);
  std::unique_ptr<Agent> agent;
  try {
    agent = make_agent(a.agent, seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto records = run_rollouts(*agent, evaluation_env(plant, a.steps), 1, seed);
  fs::create_directories(a.out);
  const fs::path path = fs::path(a.out) / "trajectory.csv";
  write_trajectory_csv(path, records.front(), plant);
  std::cout << "wrote " << path.string() << " (" << records.front().steps.size() << " steps)\n";
  return 0;
}

struct TrainArgs {
  std::string plan, plant, out = "out", checkpoint;
  std::optional<std::uint64_t> seed;
  double scale = 1.0;
  int phase = 1;
  bool dry_run = false;
};

int run_train_curriculum(const TrainArgs& a) {
  CurriculumPlan plan = scaled(load_plan(a.plan), a.scale);
  plan.master_seed = resolve_seed(a.seed, plan.master_seed);
  plan.output_dir = a.out;
  const PlantConfig plant = load_plant(a.plant);
  if (a.dry_run) {
    std::cout << to_json(plan).dump(2) << '\n';
    return 0;
  }
  const auto result = run_curriculum(plan, plant, PPOHyperparams{}, a.out);
  for (const auto& c : result.checkpoints) std::cout << "wrote " << c.string() << '\n';
  return 0;
}

int run_train_phase(const TrainArgs& a) {
  const CurriculumPlan plan = scaled(load_plan(a.plan), a.scale);
  if (a.phase < 1 || a.phase > static_cast<int>(plan.phases.size()))
    throw UsageError("--phase must be between 1 and " + std::to_string(plan.phases.size()));
  const PlantConfig plant = load_plant(a.plant);
  std::optional<PolicyCheckpoint> incoming;
  if (!a.checkpoint.empty()) incoming = load_checkpoint(a.checkpoint);
  const std::uint64_t seed = phase_seed(resolve_seed(a.seed, plan.master_seed), a.phase - 1);
  fs::create_directories(a.out);
  const std::string k = std::to_string(a.phase);
  const auto r = run_phase(plan.phases[a.phase - 1], plant, incoming, seed, PPOHyperparams{},
                           fs::path(a.out) / ("train_phase" + k + ".csv"));
  const fs::path ckpt = fs::path(a.out) / ("ckpt_phase" + k + ".bin");
  save_checkpoint(ckpt, r.checkpoint);
  std::cout << "wrote " << ckpt.string() << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string checkpoint, agent, plant, out = "out";
  int rollouts = 15;
  int steps = 600;
  std::optional<std::uint64_t> seed;
  bool no_mask = false;
};

void print_summary(const MetricsReport& r) {
  std::cout << "agent                 " << r.agent << '\n'
            << "rollouts              " << r.rollouts << '\n'
            << "emptying actions      " << r.emptying_action_count << '\n'
            << "volume deviation      " << format_optional(r.deviation.mean) << " +- "
            << format_optional(r.deviation.stddev) << '\n'
            << "PU utilization (s)    " << format_double(r.utilization.total_seconds) << '\n'
            << "violations (%)        " << format_optional(r.violation_percentage) << '\n'
            << "overflow steps        " << r.overflow_steps << '\n'
            << "mask violations       " << r.mask_violations << '\n';
}

int run_evaluate(const EvaluateArgs& a) {
  if (a.checkpoint.empty() == a.agent.empty()) throw UsageError("give exactly one of --checkpoint or --agent");
  if (a.rollouts < 1) throw UsageError("--rollouts must be >= 1");
  const PlantConfig plant = load_plant(a.plant);
  const std::uint64_t seed = resolve_seed(a.seed);
  const EnvConfig env = evaluation_env(plant, a.steps);

  std::unique_ptr<Agent> agent;
  std::string label;
  if (!a.checkpoint.empty()) {
    const PolicyCheckpoint ckpt = load_checkpoint(a.checkpoint);
    if (ckpt.policy_spec.input_dim != env.observation_dim() || ckpt.policy_spec.output_dim != env.n_actions())
      throw std::runtime_error("checkpoint dimensions (" + std::to_string(ckpt.policy_spec.input_dim) + " -> " +
                               std::to_string(ckpt.policy_spec.output_dim) + ") do not match plant (" +
                               std::to_string(env.observation_dim()) + " -> " + std::to_string(env.n_actions()) + ")");
    agent = std::make_unique<PolicyAgent>(ckpt, !a.no_mask);
    label = "policy:" + ckpt.provenance;
  } else {
    try {
      agent = make_agent(a.agent, seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    label = agent->name();
  }
  const auto records = run_rollouts(*agent, env, a.rollouts, seed);
  const MetricsReport report = build_report(label, records, plant);
  export_report(report, records, plant, a.out);
  print_summary(report);
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

// Stacks the metrics.csv rows of several evaluation directories into one table.
int run_report(const ReportArgs& a) {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  for (const auto& dir : a.inputs) {
    const CsvTable t = read_csv(fs::path(dir) / "metrics.csv");
    if (header.empty()) header = t.header;
    if (t.header != header) throw std::runtime_error(dir + ": metrics.csv columns differ from the first input");
    for (auto row : t.rows) rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::cout << header[i];
    for (const auto& r : rows) std::cout << '\t' << r[i];
    std::cout << '\n';
  }
  if (!a.out.empty()) {
    CsvWriter w(a.out, header);
    for (const auto& r : rows) w.row(r);
  }
  return 0;
}

int run_gradcheck(std::optional<std::uint64_t> seed_flag, bool perturb, int trials) {
  const std::uint64_t seed = resolve_seed(seed_flag);
  const GradCheckResult r = gradient_check(seed, trials, perturb);
  std::cout << "kernels            " << kernels::to_string(kernels::active_isa()) << '\n'
            << "nets checked       " << r.nets_checked << '\n'
            << "max relative error " << format_double(r.max_relative_error) << '\n'
            << "tolerance          " << format_double(kGradCheckTolerance) << '\n'
            << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binyard: waste-sorting plant simulator, PPO curriculum trainer and evaluator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "run one evaluation rollout and write its trajectory CSV");
  c_sim->add_option("--plant", sim.plant, "plant JSON (default: built-in 11-container plant)");
  c_sim->add_option("--agent", sim.agent, "analytic | do-nothing | random");
  c_sim->add_option("--steps", sim.steps, "episode length in steps")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "seed (fallback: $BINYARD_SEED, then 0)");
  c_sim->add_option("--out", sim.out, "output directory");

  TrainArgs cur;
  auto* c_cur = app.add_subcommand("train-curriculum", "train all curriculum phases in order");
  c_cur->add_option("--plan", cur.plan, "curriculum plan JSON (default: built-in five-phase plan)");
  c_cur->add_option("--plant", cur.plant, "plant JSON");
  c_cur->add_option("--seed", cur.seed, "master seed (overrides the plan file)");
  c_cur->add_option("--out", cur.out, "output directory");
  c_cur->add_option("--scale", cur.scale, "multiply every phase budget")->check(CLI::PositiveNumber);
  c_cur->add_flag("--dry-run", cur.dry_run, "print the resolved plan and exit");

  TrainArgs ph;
  auto* c_ph = app.add_subcommand("train-phase", "train a single curriculum phase");
  c_ph->add_option("--plan", ph.plan, "curriculum plan JSON");
  c_ph->add_option("--phase", ph.phase, "phase number, 1-based")->required();
  c_ph->add_option("--checkpoint", ph.checkpoint, "incoming checkpoint (fresh init when omitted)");
  c_ph->add_option("--plant", ph.plant, "plant JSON");
  c_ph->add_option("--seed", ph.seed, "master seed");
  c_ph->add_option("--out", ph.out, "output directory");
  c_ph->add_option("--scale", ph.scale, "multiply the phase budget")->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "evaluate a checkpoint or baseline agent and write a report");
  c_ev->add_option("--checkpoint", ev.checkpoint, "trained checkpoint");
  c_ev->add_option("--agent", ev.agent, "analytic | do-nothing | random");
  c_ev->add_option("--plant", ev.plant, "plant JSON");
  c_ev->add_option("--rollouts", ev.rollouts, "number of rollouts");
  c_ev->add_option("--steps", ev.steps, "steps per rollout")->check(CLI::PositiveNumber);
  c_ev->add_option("--seed", ev.seed, "seed");
  c_ev->add_option("--out", ev.out, "output directory");
  c_ev->add_flag("--no-mask", ev.no_mask, "disable action masking for checkpoint inference");

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "combine metrics from several evaluate runs");
  c_rep->add_option("--in", rep.inputs, "evaluate output directory (repeatable)")->required();
  c_rep->add_option("--out", rep.out, "write the combined table to this CSV");

  std::optional<std::uint64_t> gc_seed;
  bool gc_perturb = false;
  int gc_trials = 20;
  auto* c_gc = app.add_subcommand("gradcheck", "finite-difference check of network gradients");
  c_gc->add_option("--seed", gc_seed, "seed");
  c_gc->add_option("--trials", gc_trials, "number of random nets")->check(CLI::PositiveNumber);
  c_gc->add_flag("--perturb-bug", gc_perturb, "corrupt one analytic gradient (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_cur->parsed()) return run_train_curriculum(cur);
    if (c_ph->parsed()) return run_train_phase(ph);
    if (c_ev->parsed()) return run_evaluate(ev);
    if (c_rep->parsed()) return run_report(rep);
    if (c_gc->parsed()) return run_gradcheck(gc_seed, gc_perturb, gc_trials);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
