#include "binyard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "binyard/csv.hpp"
#include "binyard/json_io.hpp"

namespace binyard {

std::uint64_t rollout_seed(std::uint64_t master, int k) {
  return derive_seed(derive_seed(master, streams::kEvalRollouts), static_cast<std::uint64_t>(k));
}

EnvConfig evaluation_env(const PlantConfig& plant, int steps) {
  EnvConfig c;
  c.plant = plant;
  c.timestep_seconds = 60.0;
  c.episode_length = steps;
  c.stochastic_fill = true;
  c.pu_constrained = true;
  c.reward_spec = RewardSpec::for_kind(RewardKind::Precision);
  c.init_mode = InitMode::Uniform;
  c.eval_mode = true;
  return c;
}

std::vector<RolloutRecord> run_rollouts(Agent& agent, EnvConfig config, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("run_rollouts: count must be >= 1");
  config.eval_mode = true;
  config.validate();
  const int m = config.plant.n_pus();

  std::vector<RolloutRecord> records;
  records.reserve(count);
  for (int k = 0; k < count; ++k) {
    RolloutRecord rec;
    rec.seed = rollout_seed(seed, k);
    EnvState state = reset_state(config, rec.seed);
    Observation obs = make_observation(state, config);
    agent.begin_episode(rec.seed);
    bool done = false;
    while (!done) {
      const auto mask = action_mask(state, config);
      const int a = agent.act(state, obs, mask, config);
      if (a < 0 || a > config.n_containers()) throw std::out_of_range("agent emitted action " + std::to_string(a));

      StepRecord sr;
      sr.step = state.step_index;
      sr.volumes = state.volumes;
      sr.action = a;
      sr.mask_violation = !mask[a];
      StepOutcome out = step(state, a, config);
      sr.success = out.info.action_success;
      sr.acted_container = out.info.acted_container;
      if (sr.success) sr.emptied_volume = out.info.emptied_volume;
      sr.reward = out.reward;
      sr.pu_assigned = out.info.pu_assigned;
      sr.busy_seconds = out.info.busy_seconds;
      sr.overflow_count = out.info.overflow_count;
      sr.pu_busy.resize(m);
      for (int j = 0; j < m; ++j) sr.pu_busy[j] = state.pu_free_in(j);
      rec.total_reward += out.reward;
      rec.steps.push_back(std::move(sr));
      obs = std::move(out.observation);
      done = out.terminated || out.truncated;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

DeviationStats volume_deviation(const std::vector<RolloutRecord>& records, const PlantConfig& plant) {
  const int n = plant.n_containers();
  std::vector<std::vector<double>> per(n);
  std::vector<double> all;
  for (const auto& r : records)
    for (const auto& s : r.steps) {
      if (!s.success || !s.emptied_volume) continue;
      const int ci = s.acted_container - 1;
      const double d = std::fabs(*s.emptied_volume - plant.containers[ci].ideal_volume);
      per[ci].push_back(d);
      all.push_back(d);
    }

  DeviationStats out;
  out.emptyings = all.size();
  out.per_container_mean.resize(n);
  out.per_container_percent.resize(n);
  for (int i = 0; i < n; ++i) {
    if (per[i].empty()) continue;
    double s = 0.0;
    for (double d : per[i]) s += d;
    const double mean = s / static_cast<double>(per[i].size());
    out.per_container_mean[i] = mean;
    out.per_container_percent[i] = 100.0 * mean / plant.containers[i].ideal_volume;
  }
  if (!all.empty()) {
    double s = 0.0;
    for (double d : all) s += d;
    const double mean = s / static_cast<double>(all.size());
    double var = 0.0;
    for (double d : all) var += (d - mean) * (d - mean);
    out.mean = mean;
    out.stddev = std::sqrt(var / static_cast<double>(all.size()));
  }
  return out;
}

std::optional<double> safety_violation_rate(const std::vector<RolloutRecord>& records, const PlantConfig& plant) {
  std::size_t total = 0, bad = 0;
  for (const auto& r : records)
    for (const auto& s : r.steps) {
      if (!s.success || !s.emptied_volume) continue;
      ++total;
      if (*s.emptied_volume > plant.containers[s.acted_container - 1].max_volume) ++bad;
    }
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(bad) / static_cast<double>(total);
}

PuUtilization pu_utilization(const std::vector<RolloutRecord>& records, const PlantConfig& plant) {
  PuUtilization u;
  u.per_pu_seconds.assign(plant.n_pus(), 0.0);
  for (const auto& r : records)
    for (const auto& s : r.steps) {
      if (!s.success) continue;
      const auto j = plant.pu_index(s.pu_assigned);
      if (!j) continue;
      u.per_pu_seconds[*j] += s.busy_seconds;
      u.total_seconds += s.busy_seconds;
    }
  return u;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("ecdf: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  out.back().second = 1.0;
  return out;
}

MetricsReport build_report(const std::string& agent, const std::vector<RolloutRecord>& records,
                           const PlantConfig& plant) {
  MetricsReport r;
  r.agent = agent;
  r.rollouts = static_cast<int>(records.size());
  r.emptied_volumes.resize(plant.n_containers());
  double reward_sum = 0.0;
  for (const auto& rec : records) {
    bool overflowed = false;
    reward_sum += rec.total_reward;
    for (const auto& s : rec.steps) {
      ++r.steps;
      if (s.action > 0) ++r.attempted_emptying_count;
      if (s.success && s.emptied_volume) {
        ++r.emptying_action_count;
        r.emptied_volumes[s.acted_container - 1].push_back(*s.emptied_volume);
        if (*s.emptied_volume > plant.containers[s.acted_container - 1].max_volume) ++r.violating_emptyings;
      }
      if (s.overflow_count > 0) {
        ++r.overflow_steps;
        overflowed = true;
      }
      if (s.mask_violation) ++r.mask_violations;
    }
    if (overflowed) ++r.episodes_with_overflow;
  }
  if (!records.empty()) r.mean_episode_reward = reward_sum / static_cast<double>(records.size());
  r.overflow_step_percentage = r.steps ? 100.0 * static_cast<double>(r.overflow_steps) / r.steps : 0.0;
  r.deviation = volume_deviation(records, plant);
  r.utilization = pu_utilization(records, plant);
  r.violation_percentage = safety_violation_rate(records, plant);
  return r;
}

namespace {

std::vector<std::string> metrics_header(const PlantConfig& plant) {
  std::vector<std::string> h = {"agent",
                                "rollouts",
                                "steps",
                                "emptying_action_count",
                                "attempted_emptying_count",
                                "avg_volume_deviation",
                                "std_volume_deviation"};
  for (const auto& pu : plant.pus) h.push_back("pu" + std::to_string(pu.id) + "_utilization_seconds");
  for (const std::string s : {"pu_total_utilization_seconds", "violation_percentage", "violating_emptyings",
                              "overflow_steps", "overflow_step_percentage", "episodes_with_overflow",
                              "mask_violations", "mean_episode_reward"})
    h.push_back(s);
  return h;
}

nlohmann::ordered_json opt_json(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void export_report(const MetricsReport& r, const std::vector<RolloutRecord>& records, const PlantConfig& plant,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    CsvWriter w(out_dir / "metrics.csv", metrics_header(plant));
    if (!records.empty()) {
      std::vector<std::string> row = {r.agent,
                                      std::to_string(r.rollouts),
                                      std::to_string(r.steps),
                                      std::to_string(r.emptying_action_count),
                                      std::to_string(r.attempted_emptying_count),
                                      format_optional(r.deviation.mean),
                                      format_optional(r.deviation.stddev)};
      for (double s : r.utilization.per_pu_seconds) row.push_back(format_double(s));
      row.push_back(format_double(r.utilization.total_seconds));
      row.push_back(format_optional(r.violation_percentage));
      row.push_back(std::to_string(r.violating_emptyings));
      row.push_back(std::to_string(r.overflow_steps));
      row.push_back(format_double(r.overflow_step_percentage));
      row.push_back(std::to_string(r.episodes_with_overflow));
      row.push_back(std::to_string(r.mask_violations));
      row.push_back(format_optional(r.mean_episode_reward));
      w.row(row);
    }
  }

  for (int i = 0; i < plant.n_containers(); ++i) {
    CsvWriter w(out_dir / ("ecdf_" + std::to_string(plant.containers[i].id) + ".csv"),
                {"volume", "cumulative_fraction"});
    if (i < static_cast<int>(r.emptied_volumes.size()) && !r.emptied_volumes[i].empty())
      for (const auto& [v, f] : ecdf(r.emptied_volumes[i])) w.row({format_double(v), format_double(f)});
  }

  for (std::size_t k = 0; k < records.size(); ++k)
    write_trajectory_csv(out_dir / ("rollout_" + std::to_string(k + 1) + ".csv"), records[k], plant);

  nlohmann::ordered_json j;
  j["agent"] = r.agent;
  j["rollouts"] = r.rollouts;
  j["steps"] = r.steps;
  j["emptying_action_count"] = r.emptying_action_count;
  j["attempted_emptying_count"] = r.attempted_emptying_count;
  j["avg_volume_deviation"] = opt_json(r.deviation.mean);
  j["std_volume_deviation"] = opt_json(r.deviation.stddev);
  auto& per = j["per_container"] = nlohmann::ordered_json::array();
  for (int i = 0; i < plant.n_containers(); ++i) {
    nlohmann::ordered_json c;
    c["id"] = plant.containers[i].id;
    c["emptyings"] = i < static_cast<int>(r.emptied_volumes.size()) ? r.emptied_volumes[i].size() : 0;
    c["mean_deviation"] = opt_json(r.deviation.per_container_mean.empty() ? std::nullopt
                                                                            : r.deviation.per_container_mean[i]);
    c["percent_deviation"] = opt_json(r.deviation.per_container_percent.empty()
                                          ? std::nullopt
                                          : r.deviation.per_container_percent[i]);
    per.push_back(c);
  }
  j["pu_utilization_seconds"] = r.utilization.per_pu_seconds;
  j["pu_total_utilization_seconds"] = r.utilization.total_seconds;
  j["violation_percentage"] = opt_json(r.violation_percentage);
  j["violating_emptyings"] = r.violating_emptyings;
  j["overflow_steps"] = r.overflow_steps;
  j["overflow_step_percentage"] = r.overflow_step_percentage;
  j["episodes_with_overflow"] = r.episodes_with_overflow;
  j["mask_violations"] = r.mask_violations;
  j["mean_episode_reward"] = opt_json(r.mean_episode_reward);
  write_json_file(out_dir / "report.json", j);
}

void write_trajectory_csv(const std::filesystem::path& path, const RolloutRecord& rec, const PlantConfig& plant) {
  std::vector<std::string> header = {"step", "container_id", "volume", "action", "success", "reward"};
  for (const auto& pu : plant.pus) header.push_back("pu" + std::to_string(pu.id) + "_busy");
  for (const auto& c : plant.containers) header.push_back("v" + std::to_string(c.id));
  CsvWriter w(path, header);
  for (const auto& s : rec.steps) {
    const double acted_volume = s.acted_container > 0 ? s.volumes[s.acted_container - 1] : 0.0;
    std::vector<std::string> row = {std::to_string(s.step),      std::to_string(s.acted_container),
                                    format_double(acted_volume), std::to_string(s.action),
                                    s.success ? "1" : "0",       format_double(s.reward)};
    for (double b : s.pu_busy) row.push_back(format_double(b));
    for (double v : s.volumes) row.push_back(format_double(v));
    w.row(row);
  }
}

}  // namespace binyard
