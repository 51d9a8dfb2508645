#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cccrl/clustering.hpp"
#include "cccrl/ddpg.hpp"
#include "cccrl/envs.hpp"
#include "cccrl/rng.hpp"

namespace cccrl {

/// Fixed-capacity ring; once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(TransitionTuple t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }

  const TransitionTuple& sample(Rng& rng) const;
  const std::vector<TransitionTuple>& data() const { return data_; }

 private:
  std::size_t capacity_;
  std::size_t write_ = 0;
  std::vector<TransitionTuple> data_;
};

/// Mean-reverting exploration noise. The state relaxes toward mu at rate
/// theta_rate; sigma scales the Brownian kicks.
struct OuNoise {
  double mu = 0.0;
  double sigma = 0.3;
  double theta_rate = 0.15;
  double dt = 1.0;
  double current = 0.0;

  void reset(double mean) {
    mu = mean;
    current = mean;
  }

  double sample(Rng& rng) {
    current += theta_rate * (mu - current) * dt;
    if (sigma > 0.0) current += sigma * std::sqrt(dt) * rng.normal();
    return current;
  }
};

/// Episode-start draw of per-agent exploration means mu_n ~ N(0, sigma1^2).
Eigen::VectorXd sample_episode_means(int n, double sigma1, Rng& rng);

/// Multiplies both exploration scales by decay.
std::pair<double, double> anneal(double sigma1, double sigma2, double decay);

/// Policy action plus exploration noise, clipped to the action bound.
Eigen::VectorXd select_action(const DdpgAgent& agent,
                              const Eigen::VectorXd& state, OuNoise& noise,
                              Rng& rng);

enum class ShareSchemeKind { kSimilarity, kGlobal, kNone, kSeedSampling };

std::string share_scheme_name(ShareSchemeKind kind);
ShareSchemeKind share_scheme_from_name(const std::string& name);

/// How minibatches are assembled across the agents' replay buffers:
///   similarity    per-agent integer quotas from the allocation matrix
///   global        uniform over the union of all buffers
///   none          own buffer only
///   seed_sampling union sampling with the agent's fixed reward perturbation
struct ShareScheme {
  ShareSchemeKind kind = ShareSchemeKind::kNone;
  SimilarityAllocation allocation;    // similarity only
  std::vector<double> seed_noise;     // seed_sampling only, one z per agent
};

/// Draws exactly `batch` transitions for agent n under the scheme. Quota
/// pointed at an empty buffer is rerouted to the agent's own buffer;
/// `reallocations`, when given, counts such events.
std::vector<TransitionTuple> build_minibatch(
    const std::vector<ReplayBuffer>& buffers, const ShareScheme& scheme,
    int agent_index, int batch, Rng& rng, int* reallocations = nullptr);

struct TrainConfig {
  int epochs = 100;
  int steps_per_epoch = 0;  // 0 -> env horizon
  int batch = 64;
  double sigma1 = -1.0;  // exploration mean scale; <0 -> 0.6 * action_bound
  double sigma2 = -1.0;  // OU sigma; <0 -> 0.3 * action_bound
  double decay = 0.999;
  double ou_theta = 0.15;
  std::uint64_t seed = 0;
  int divergence_tolerance = 10;
  std::size_t buffer_capacity = 100000;
  std::vector<int> agent_ids;  // stream ids; empty -> 0..N-1
};

struct EpisodeRecord {
  int epoch = 0;
  int agent = 0;
  double episode_return = 0.0;
};

struct TrainingLog {
  std::vector<EpisodeRecord> episodes;
  int skipped_updates = 0;
  int buffer_reallocations = 0;

  double mean_return(int first_epoch, int last_epoch) const;
};

/// Concurrent training loop: every epoch is one episode per agent with
/// freshly sampled exploration means; agents act and cache in lockstep, the
/// scales anneal once per time step, and each agent then updates from a
/// scheme-assembled minibatch once its own buffer holds a full batch.
/// Each agent draws from a stream derived from (seed, agent id), so a run
/// with scheme `none` reproduces the same per-agent trajectories as
/// training each agent alone with its id.
TrainingLog train_concurrent(const std::vector<EnvSpec>& envs,
                             std::vector<DdpgAgent>& agents,
                             const ShareScheme& scheme,
                             const TrainConfig& config);

}  // namespace cccrl
