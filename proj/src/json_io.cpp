#include "binyard/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace binyard {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

Json to_json(const PlantConfig& p) {
  Json j;
  auto& cs = j["containers"] = Json::array();
  for (const auto& c : p.containers)
    cs.push_back(Json{{"id", c.id},
                      {"alpha", c.alpha},
                      {"noise_sigma", c.noise_sigma},
                      {"ideal_volume", c.ideal_volume},
                      {"max_volume", c.max_volume},
                      {"allowed_pus", c.allowed_pus}});
  auto& ps = j["pus"] = Json::array();
  for (const auto& u : p.pus)
    ps.push_back(Json{{"id", u.id},
                      {"beta", u.beta},
                      {"lambda", u.lambda},
                      {"product_size", u.product_size},
                      {"belt_count", u.belt_count}});
  auto& ov = j["pu_params"] = Json::array();
  for (const auto& o : p.pu_params)
    ov.push_back(Json{{"container", o.container},
                      {"pu", o.pu},
                      {"beta", o.params.beta},
                      {"lambda", o.params.lambda},
                      {"product_size", o.params.product_size}});
  return j;
}

PlantConfig plant_from_json(const Json& j) {
  PlantConfig p;
  for (const auto& c : j.at("containers")) {
    ContainerSpec s;
    s.id = c.at("id").get<int>();
    s.alpha = c.at("alpha").get<double>();
    s.noise_sigma = c.at("noise_sigma").get<double>();
    s.ideal_volume = c.at("ideal_volume").get<double>();
    s.max_volume = get_or(c, "max_volume", 40.0);
    s.allowed_pus = c.at("allowed_pus").get<std::vector<int>>();
    p.containers.push_back(std::move(s));
  }
  for (const auto& u : j.at("pus")) {
    PUSpec s;
    s.id = u.at("id").get<int>();
    s.beta = u.at("beta").get<double>();
    s.lambda = u.at("lambda").get<double>();
    s.product_size = u.at("product_size").get<double>();
    s.belt_count = get_or(u, "belt_count", 1);
    p.pus.push_back(s);
  }
  if (j.contains("pu_params"))
    for (const auto& o : j.at("pu_params"))
      p.pu_params.push_back(PairOverride{o.at("container").get<int>(), o.at("pu").get<int>(),
                                         PairParams{o.at("beta").get<double>(), o.at("lambda").get<double>(),
                                                    o.at("product_size").get<double>()}});
  p.validate();
  return p;
}

Json to_json(const RewardSpec& r) {
  return Json{{"kind", to_string(r.kind)},
              {"peak_height", r.peak_height},
              {"peak_width", r.peak_width},
              {"penalty", r.penalty},
              {"action_penalty", r.action_penalty},
              {"positional_enabled", r.positional_enabled},
              {"termination_enabled", r.termination_enabled},
              {"termination_bonus", r.termination_bonus},
              {"overflow_penalty", r.overflow_penalty},
              {"precision_halfwidth", r.precision_halfwidth}};
}

RewardSpec reward_spec_from_json(const Json& j) {
  RewardSpec r = RewardSpec::for_kind(reward_kind_from_string(j.at("kind").get<std::string>()));
  r.peak_height = get_or(j, "peak_height", r.peak_height);
  r.peak_width = get_or(j, "peak_width", r.peak_width);
  r.penalty = get_or(j, "penalty", r.penalty);
  r.action_penalty = get_or(j, "action_penalty", r.action_penalty);
  r.positional_enabled = get_or(j, "positional_enabled", r.positional_enabled);
  r.termination_enabled = get_or(j, "termination_enabled", r.termination_enabled);
  r.termination_bonus = get_or(j, "termination_bonus", r.termination_bonus);
  r.overflow_penalty = get_or(j, "overflow_penalty", r.overflow_penalty);
  r.precision_halfwidth = get_or(j, "precision_halfwidth", r.precision_halfwidth);
  r.validate();
  return r;
}

Json to_json(const EnvConfig& c) {
  return Json{{"plant", to_json(c.plant)},
              {"timestep_seconds", c.timestep_seconds},
              {"episode_length", c.episode_length},
              {"stochastic_fill", c.stochastic_fill},
              {"pu_constrained", c.pu_constrained},
              {"reward_spec", to_json(c.reward_spec)},
              {"init_mode", to_string(c.init_mode)},
              {"eval_mode", c.eval_mode}};
}

EnvConfig env_config_from_json(const Json& j) {
  EnvConfig c;
  c.plant = j.contains("plant") ? plant_from_json(j.at("plant")) : default_plant();
  c.timestep_seconds = get_or(j, "timestep_seconds", c.timestep_seconds);
  c.episode_length = get_or(j, "episode_length", c.episode_length);
  c.stochastic_fill = get_or(j, "stochastic_fill", c.stochastic_fill);
  c.pu_constrained = get_or(j, "pu_constrained", c.pu_constrained);
  if (j.contains("reward_spec")) c.reward_spec = reward_spec_from_json(j.at("reward_spec"));
  if (j.contains("init_mode")) c.init_mode = init_mode_from_string(j.at("init_mode").get<std::string>());
  c.eval_mode = get_or(j, "eval_mode", c.eval_mode);
  c.validate();
  return c;
}

Json to_json(const MlpSpec& s) {
  return Json{{"input_dim", s.input_dim},
              {"hidden_layers", s.hidden_layers},
              {"output_dim", s.output_dim},
              {"activation", "tanh"}};
}

MlpSpec mlp_spec_from_json(const Json& j) {
  MlpSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  s.hidden_layers = j.at("hidden_layers").get<std::vector<int>>();
  s.output_dim = j.at("output_dim").get<int>();
  s.validate();
  return s;
}

Json to_json(const PhaseConfig& p) {
  return Json{{"name", p.name},
              {"budget_timesteps", p.budget_timesteps},
              {"timestep_seconds", p.timestep_seconds},
              {"episode_length_steps", p.episode_length_steps},
              {"reward_spec", to_json(p.reward_spec)},
              {"stochastic_fill", p.stochastic_fill},
              {"pu_constrained", p.pu_constrained},
              {"freeze_policy", p.freeze_policy},
              {"freeze_value", p.freeze_value},
              {"target_kl", p.target_kl ? Json(*p.target_kl) : Json(nullptr)},
              {"init_mode", to_string(p.init_mode)}};
}

PhaseConfig phase_from_json(const Json& j) {
  PhaseConfig p;
  p.name = j.at("name").get<std::string>();
  p.budget_timesteps = j.at("budget_timesteps").get<std::uint64_t>();
  p.timestep_seconds = get_or(j, "timestep_seconds", p.timestep_seconds);
  p.episode_length_steps = get_or(j, "episode_length_steps", p.episode_length_steps);
  if (j.contains("reward_spec")) p.reward_spec = reward_spec_from_json(j.at("reward_spec"));
  p.stochastic_fill = get_or(j, "stochastic_fill", p.stochastic_fill);
  p.pu_constrained = get_or(j, "pu_constrained", p.pu_constrained);
  p.freeze_policy = get_or(j, "freeze_policy", p.freeze_policy);
  p.freeze_value = get_or(j, "freeze_value", p.freeze_value);
  if (j.contains("target_kl") && !j.at("target_kl").is_null()) p.target_kl = j.at("target_kl").get<double>();
  if (j.contains("init_mode")) p.init_mode = init_mode_from_string(j.at("init_mode").get<std::string>());
  p.validate();
  return p;
}

Json to_json(const CurriculumPlan& p) {
  Json j;
  j["master_seed"] = p.master_seed;
  j["output_dir"] = p.output_dir;
  auto& ph = j["phases"] = Json::array();
  for (const auto& x : p.phases) ph.push_back(to_json(x));
  return j;
}

CurriculumPlan plan_from_json(const Json& j) {
  CurriculumPlan p;
  p.master_seed = get_or<std::uint64_t>(j, "master_seed", 0);
  p.output_dir = get_or<std::string>(j, "output_dir", p.output_dir);
  for (const auto& x : j.at("phases")) p.phases.push_back(phase_from_json(x));
  p.validate();
  return p;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace binyard
