#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cccrl/agents.hpp"
#include "cccrl/anm_mm.hpp"
#include "cccrl/clustering.hpp"
#include "cccrl/config.hpp"
#include "cccrl/envs.hpp"

namespace cccrl {

/// Scalar the cause/effect extraction reads off a state observation
/// (the state itself for AR tasks, the angular velocity for the swing-up
/// tasks).
double cause_coordinate(EnvKind kind, const Eigen::VectorXd& obs);

/// Reward magnitude per task, used to scale the seed-sampling perturbation.
double reward_scale(EnvKind kind);

/// Cause matrix: P uniform draws over [lo, hi] shared by all agents, each
/// agent's row jittered with N(0, 1e-4) noise. Effect matrix: per agent, a
/// random-policy dataset of 10 P transitions is rolled out and each cause
/// sample is answered by its nearest neighbour's reward or next-state
/// coordinate. Agents with identical hidden parameters roll out identical
/// datasets.
CauseEffectDataset generate_cause_effect(const std::vector<EnvSpec>& envs,
                                         Eigen::Index p, double lo, double hi,
                                         EffectKind effect,
                                         std::uint64_t seed);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

double silhouette_score(const Eigen::MatrixXd& points,
                        const std::vector<int>& labels);

struct ClusterQuality {
  double ari = 0.0;
  double silhouette = 0.0;
  std::vector<int> assignments;
};

/// Fits a GMM (components = number of distinct labels) on theta and scores
/// its hard assignments against the ground-truth labels.
ClusterQuality clustering_quality(const Eigen::MatrixXd& theta,
                                  const std::vector<int>& labels,
                                  std::uint64_t seed);

/// One seed's worth of pipeline: environment sampling, extraction and
/// clustering (when the scheme calls for it), and optionally training.
struct SeedRunResult {
  std::uint64_t seed = 0;
  SampledEnvs envs;
  bool extracted = false;
  ThetaMatrix theta;
  GmmFit gmm;
  SimilarityAllocation allocation;
  TrainingLog log;
  std::vector<std::string> warnings;
};

SeedRunResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                       bool do_train);

struct RunArtifacts {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  std::vector<SeedRunResult> results;
};

/// Stages 1-9 only: extraction and allocation artifacts for every seed.
RunArtifacts run_extract(const ExperimentConfig& config);

/// Full pipeline over all configured seeds; seeds run in a small worker
/// pool. Writes per-seed theta/allocation CSVs, a merged learning-curve
/// CSV, the canonical config echo and a warnings log.
RunArtifacts run_pipeline(const ExperimentConfig& config, int jobs = 0);

/// Desk-scale preset configs behind the `reproduce` subcommand.
/// fig2: AR learning curves under all four schemes. fig3: extraction on all
/// four tasks. fig4: sparse AR with and without coordinated exploration.
/// fig5/fig6: pendulum and cart-pole curves.
struct PlanEntry {
  std::string name;
  ExperimentConfig config;
  bool extract_only = false;
};

std::vector<PlanEntry> reproduce_plan(const std::string& figure,
                                      const std::string& out_dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast self-verification suite: HSIC against a brute-force oracle,
/// gradient checks against central finite differences, EM monotonicity,
/// batch-allocation exactness and environment invariants.
std::vector<CheckResult> run_quick_checks();

}  // namespace cccrl
