#include "binyard/plant.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace binyard {

std::optional<int> PlantConfig::pu_index(int pu_id) const {
  for (int j = 0; j < n_pus(); ++j)
    if (pus[j].id == pu_id) return j;
  return std::nullopt;
}

PairParams PlantConfig::pair_params(int ci, int pj) const {
  const int cid = containers.at(ci).id;
  const int pid = pus.at(pj).id;
  for (const auto& o : pu_params)
    if (o.container == cid && o.pu == pid) return o.params;
  const auto& pu = pus[pj];
  return PairParams{pu.beta, pu.lambda, pu.product_size};
}

void PlantConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("plant config: " + what); };
  if (containers.empty()) fail("no containers");
  if (pus.empty()) fail("no processing units");

  std::set<int> pu_ids;
  for (const auto& p : pus) {
    const std::string tag = "PU " + std::to_string(p.id);
    if (!pu_ids.insert(p.id).second) fail("duplicate " + tag);
    if (!(p.beta >= 0)) fail(tag + ": beta must be >= 0");
    if (!(p.lambda >= 0)) fail(tag + ": lambda must be >= 0");
    if (!(p.product_size > 0)) fail(tag + ": product_size must be > 0");
    if (p.belt_count != 1 && p.belt_count != 2) fail(tag + ": belt_count must be 1 or 2");
  }

  std::set<int> ids;
  for (const auto& c : containers) {
    const std::string tag = "container " + std::to_string(c.id);
    if (!ids.insert(c.id).second) fail("duplicate " + tag);
    if (!(c.alpha > 0)) fail(tag + ": alpha must be > 0");
    if (!(c.noise_sigma >= 0)) fail(tag + ": noise_sigma must be >= 0");
    if (!(c.ideal_volume > 0 && c.ideal_volume < c.max_volume))
      fail(tag + ": need 0 < ideal_volume < max_volume");
    if (c.allowed_pus.empty()) fail(tag + ": allowed_pus is empty");
    for (int pu : c.allowed_pus)
      if (!pu_ids.count(pu)) fail(tag + ": unknown PU " + std::to_string(pu));
  }

  for (const auto& o : pu_params) {
    if (!ids.count(o.container) || !pu_ids.count(o.pu))
      fail("pu_params entry references unknown container/PU");
    if (!(o.params.beta >= 0 && o.params.lambda >= 0 && o.params.product_size > 0))
      fail("pu_params entry has invalid values");
  }
}

double fill_step(double volume, double alpha, double noise_sample, bool deterministic) {
  const double eps = deterministic ? 0.0 : noise_sample;
  return std::max(0.0, alpha + volume + eps);
}

double fill_step(double volume, const ContainerSpec& spec, double noise_sample, bool deterministic) {
  return fill_step(volume, spec.alpha, noise_sample, deterministic);
}

double processing_duration(double volume, const PairParams& params) {
  if (!(params.product_size > 0))
    throw std::invalid_argument("processing_duration: product_size must be > 0");
  return params.beta + params.lambda * std::floor(volume / params.product_size);
}

namespace {

ContainerSpec make_container(int id, double ideal, double steps_to_ideal, int pu) {
  ContainerSpec c;
  c.id = id;
  c.ideal_volume = ideal;
  c.alpha = ideal / steps_to_ideal;
  c.noise_sigma = 0.1 * c.alpha;
  c.max_volume = 40.0;
  c.allowed_pus = {pu};
  return c;
}

}  // namespace

PlantConfig default_plant() {
  // (ideal volume, 60 s steps needed to reach it from empty)
  struct Row { double ideal; double steps; };
  static constexpr Row rows[11] = {
      {20.0, 300}, {21.5, 50}, {23.0, 250}, {24.5, 75}, {26.0, 200}, {27.5, 100},
      {29.0, 150}, {30.5, 125}, {32.0, 60}, {33.5, 275}, {35.0, 90},
  };
  PlantConfig p;
  for (int i = 0; i < 11; ++i)
    p.containers.push_back(make_container(i + 1, rows[i].ideal, rows[i].steps, i < 5 ? 1 : 2));
  p.pus.push_back(PUSpec{1, 20.0, 5.0, 4.0, 1});
  p.pus.push_back(PUSpec{2, 20.0, 5.0, 4.0, 2});
  return p;
}

PlantConfig reduced_plant() {
  struct Row { double ideal; double steps; };
  static constexpr Row rows[5] = {{24.0, 60}, {30.0, 120}, {28.0, 80}, {33.0, 200}, {22.0, 100}};
  PlantConfig p;
  for (int i = 0; i < 5; ++i)
    p.containers.push_back(make_container(i + 1, rows[i].ideal, rows[i].steps, 1));
  p.pus.push_back(PUSpec{1, 20.0, 5.0, 4.0, 1});
  return p;
}

}  // namespace binyard
