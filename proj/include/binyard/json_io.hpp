#pragma once

#include <filesystem>

#include <json.hpp>

#include "binyard/curriculum.hpp"
#include "binyard/env.hpp"
#include "binyard/mlp.hpp"
#include "binyard/plant.hpp"
#include "binyard/rewards.hpp"

namespace binyard {

using Json = nlohmann::ordered_json;

Json to_json(const PlantConfig& p);
PlantConfig plant_from_json(const Json& j);

Json to_json(const RewardSpec& r);
/// Missing fields take the defaults of the given kind.
RewardSpec reward_spec_from_json(const Json& j);

Json to_json(const EnvConfig& c);
EnvConfig env_config_from_json(const Json& j);

Json to_json(const MlpSpec& s);
MlpSpec mlp_spec_from_json(const Json& j);

Json to_json(const PhaseConfig& p);
PhaseConfig phase_from_json(const Json& j);

Json to_json(const CurriculumPlan& p);
CurriculumPlan plan_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace binyard
