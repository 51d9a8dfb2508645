#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cccrl/agents.hpp"
#include "cccrl/anm_mm.hpp"
#include "cccrl/ddpg.hpp"
#include "cccrl/envs.hpp"

namespace cccrl {

enum class EffectKind { kReward, kNextState };

std::string effect_kind_name(EffectKind e);
EffectKind effect_kind_from_name(const std::string& name);

/// Everything one experiment needs: task, agent groups, cause sampling,
/// extraction settings, environment overrides and training settings.
/// Parsed from a sectioned key-value text document; unknown keys are
/// rejected.
struct ExperimentConfig {
  EnvKind task = EnvKind::kAr;
  EffectKind effect = EffectKind::kReward;
  Eigen::Index samples = 100;  // P cause samples per agent
  double interval_lo = -10.0;
  double interval_hi = 10.0;
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";
  std::vector<GroupSpec> groups;

  // [extract]
  AnmMmConfig anm;
  int components = 0;  // 0 -> group count, -1 -> BIC sweep ("auto")

  // [env] overrides; zero/negative sentinels mean task defaults
  double env_dt = 0.0;
  int env_horizon = 0;
  double env_action_bound = 0.0;
  double env_noise_sd = -1.0;
  double env_phi = 0.95;

  // [train]
  ShareSchemeKind scheme = ShareSchemeKind::kSimilarity;
  TrainConfig train;
  DdpgConfig ddpg;
  double seed_noise_sd = 0.1;  // seed-sampling z scale, times reward scale

  /// Environment template with the overrides applied (group parameters are
  /// filled in by sample_env_group).
  EnvSpec base_env() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parsing it yields an equal config.
std::string echo_config(const ExperimentConfig& config);

}  // namespace cccrl
