#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "binyard/mlp.hpp"

namespace binyard {

/// Policy and value networks plus where they came from.
///
/// On disk: 8-byte magic "BYCKPT\0\0", u32 version, both net specs, the
/// provenance string, u64 seed, u64 trained timesteps, then the policy and
/// value parameter arrays as little-endian IEEE-754 doubles, each preceded by
/// its u64 length. A JSON sidecar `<file>.json` repeats the metadata.
struct PolicyCheckpoint {
  MlpSpec policy_spec;
  MlpSpec value_spec;
  std::vector<double> policy_params;
  std::vector<double> value_params;
  std::string provenance;  // e.g. "phase1>phase2"
  std::uint64_t seed = 0;
  std::uint64_t timesteps = 0;

  void validate() const;
  Network policy_network() const;
  Network value_network() const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const PolicyCheckpoint& ckpt);
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const PolicyCheckpoint& ckpt);
PolicyCheckpoint decode_checkpoint(const std::string& bytes);

}  // namespace binyard
