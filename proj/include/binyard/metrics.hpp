#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "binyard/baselines.hpp"
#include "binyard/env.hpp"

namespace binyard {

struct StepRecord {
  int step = 0;
  std::vector<double> volumes;  // before the action
  int action = 0;
  bool success = false;
  int acted_container = 0;                // 1-based, 0 for do-nothing
  std::optional<double> emptied_volume;  // successful emptyings only
  double reward = 0.0;
  std::vector<double> pu_busy;  // seconds until each PU frees up, after the step
  int pu_assigned = 0;
  double busy_seconds = 0.0;
  int overflow_count = 0;
  bool mask_violation = false;
};

struct RolloutRecord {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  double total_reward = 0.0;
};

/// Test-environment settings shared by all agents: 60 s steps, stochastic
/// filling, constrained PUs, uniform initial volumes, overflow recorded only.
EnvConfig evaluation_env(const PlantConfig& plant, int steps = 600);

/// Runs `count` evaluation episodes (overflow never terminates) with seeds
/// derived from `seed`. Rollout k uses the same noise stream for every agent.
std::vector<RolloutRecord> run_rollouts(Agent& agent, EnvConfig config, int count, std::uint64_t seed);

std::uint64_t rollout_seed(std::uint64_t master, int k);

struct DeviationStats {
  std::optional<double> mean;
  std::optional<double> stddev;  // population
  std::vector<std::optional<double>> per_container_mean;
  std::vector<std::optional<double>> per_container_percent;  // of ideal volume
  std::size_t emptyings = 0;
};

/// |emptied volume - ideal| over all successful emptyings.
DeviationStats volume_deviation(const std::vector<RolloutRecord>& records, const PlantConfig& plant);

/// Percentage of successful emptyings whose emptied volume exceeded the
/// container's max volume. Undefined when nothing was emptied.
std::optional<double> safety_violation_rate(const std::vector<RolloutRecord>& records, const PlantConfig& plant);

struct PuUtilization {
  std::vector<double> per_pu_seconds;
  double total_seconds = 0.0;
};

PuUtilization pu_utilization(const std::vector<RolloutRecord>& records, const PlantConfig& plant);

/// Sorted distinct values with the fraction of samples <= each value.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

struct MetricsReport {
  std::string agent;
  int rollouts = 0;
  std::size_t steps = 0;
  std::size_t emptying_action_count = 0;
  std::size_t attempted_emptying_count = 0;
  DeviationStats deviation;
  PuUtilization utilization;
  std::optional<double> violation_percentage;
  std::size_t violating_emptyings = 0;
  std::size_t overflow_steps = 0;
  double overflow_step_percentage = 0.0;
  int episodes_with_overflow = 0;
  std::size_t mask_violations = 0;
  std::optional<double> mean_episode_reward;
  std::vector<std::vector<double>> emptied_volumes;  // per container
};

MetricsReport build_report(const std::string& agent, const std::vector<RolloutRecord>& records,
                           const PlantConfig& plant);

/// metrics.csv, report.json, ecdf_<container id>.csv and rollout_<k>.csv
/// (k from 1) in `out_dir`. An empty record list yields a header-only metrics.csv.
void export_report(const MetricsReport& report, const std::vector<RolloutRecord>& records, const PlantConfig& plant,
                   const std::filesystem::path& out_dir);

/// One rollout as CSV: step, container_id, volume, action, success, reward,
/// pu<j>_busy for each PU, then v<i> for each container.
void write_trajectory_csv(const std::filesystem::path& path, const RolloutRecord& record, const PlantConfig& plant);

}  // namespace binyard
