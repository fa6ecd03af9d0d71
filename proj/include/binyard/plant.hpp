#pragma once

#include <optional>
#include <vector>

namespace binyard {

/// One buffer container. Volumes are in plant volume units; `alpha` and
/// `noise_sigma` are per 60-second step.
struct ContainerSpec {
  int id = 0;
  double alpha = 0.0;
  double noise_sigma = 0.0;
  double ideal_volume = 0.0;
  double max_volume = 40.0;
  std::vector<int> allowed_pus;
};

struct PUSpec {
  int id = 0;
  double beta = 20.0;        // activation time, s
  double lambda = 5.0;       // time per product, s
  double product_size = 4.0; // volume units per product
  int belt_count = 1;
};

/// Processing parameters of one container/PU combination.
struct PairParams {
  double beta = 20.0;
  double lambda = 5.0;
  double product_size = 4.0;
};

struct PairOverride {
  int container = 0;
  int pu = 0;
  PairParams params;
};

struct PlantConfig {
  std::vector<ContainerSpec> containers;
  std::vector<PUSpec> pus;
  std::vector<PairOverride> pu_params;

  int n_containers() const { return static_cast<int>(containers.size()); }
  int n_pus() const { return static_cast<int>(pus.size()); }

  /// 0-based index of the PU with the given id, or nullopt.
  std::optional<int> pu_index(int pu_id) const;

  /// Parameters for container index `ci` emptied into PU index `pj`
  /// (override table first, then the PU's own defaults).
  PairParams pair_params(int ci, int pj) const;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Container volume after one step of the drifted random walk. `noise_sample`
/// is ignored when `deterministic` is set.
double fill_step(double volume, const ContainerSpec& spec, double noise_sample, bool deterministic);

/// Same law with an explicit drift (used when the step length differs from 60 s).
double fill_step(double volume, double alpha, double noise_sample, bool deterministic);

/// Busy time in seconds of a PU processing `volume`: beta + lambda * floor(volume / product_size).
double processing_duration(double volume, const PairParams& params);

/// Eleven containers, two PUs (PU-1 single belt, PU-2 two belts), synthetic parameters.
PlantConfig default_plant();

/// Five containers feeding a single one-belt PU. Used for desk-scale learning experiments.
PlantConfig reduced_plant();

}  // namespace binyard
