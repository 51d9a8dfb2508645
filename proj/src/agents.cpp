#include "cccrl/agents.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cccrl {

void ReplayBuffer::push(TransitionTuple t) {
  if (capacity_ == 0) {
    throw std::invalid_argument("ReplayBuffer: zero capacity");
  }
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[write_] = std::move(t);
  }
  write_ = (write_ + 1) % capacity_;
}

const TransitionTuple& ReplayBuffer::sample(Rng& rng) const {
  if (data_.empty()) {
    throw std::logic_error("ReplayBuffer: sample from empty buffer");
  }
  return data_[static_cast<std::size_t>(rng.below(data_.size()))];
}

Eigen::VectorXd sample_episode_means(int n, double sigma1, Rng& rng) {
  if (sigma1 < 0.0) {
    throw std::invalid_argument("sample_episode_means: sigma1 must be >= 0");
  }
  Eigen::VectorXd means(n);
  for (int i = 0; i < n; ++i) {
    means[i] = sigma1 > 0.0 ? rng.normal(0.0, sigma1) : 0.0;
  }
  return means;
}

std::pair<double, double> anneal(double sigma1, double sigma2, double decay) {
  if (!(decay > 0.0) || decay > 1.0) {
    throw std::invalid_argument("anneal: decay must be in (0, 1]");
  }
  return {sigma1 * decay, sigma2 * decay};
}

Eigen::VectorXd select_action(const DdpgAgent& agent,
                              const Eigen::VectorXd& state, OuNoise& noise,
                              Rng& rng) {
  Eigen::VectorXd a = actor_action(agent, state);
  const double eps = noise.sample(rng);
  a.array() += eps;
  return a.cwiseMin(agent.action_bound).cwiseMax(-agent.action_bound);
}

std::string share_scheme_name(ShareSchemeKind kind) {
  switch (kind) {
    case ShareSchemeKind::kSimilarity:
      return "similarity";
    case ShareSchemeKind::kGlobal:
      return "global";
    case ShareSchemeKind::kNone:
      return "none";
    case ShareSchemeKind::kSeedSampling:
      return "seed_sampling";
  }
  return "none";
}

ShareSchemeKind share_scheme_from_name(const std::string& name) {
  if (name == "similarity") return ShareSchemeKind::kSimilarity;
  if (name == "global") return ShareSchemeKind::kGlobal;
  if (name == "none") return ShareSchemeKind::kNone;
  if (name == "seed_sampling") return ShareSchemeKind::kSeedSampling;
  throw std::invalid_argument("unknown share scheme: " + name);
}

namespace {

// uniform draw over the union of all buffers, weighted by buffer size
const TransitionTuple& sample_union(const std::vector<ReplayBuffer>& buffers,
                                    Rng& rng) {
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.size();
  if (total == 0) {
    throw std::logic_error("sample_union: all buffers empty");
  }
  std::size_t pick = static_cast<std::size_t>(rng.below(total));
  for (const auto& b : buffers) {
    if (pick < b.size()) return b.data()[pick];
    pick -= b.size();
  }
  throw std::logic_error("sample_union: unreachable");
}

}  // namespace

std::vector<TransitionTuple> build_minibatch(
    const std::vector<ReplayBuffer>& buffers, const ShareScheme& scheme,
    int agent_index, int batch, Rng& rng, int* reallocations) {
  if (batch < 1) {
    throw std::invalid_argument("build_minibatch: batch must be >= 1");
  }
  const auto& own = buffers[static_cast<std::size_t>(agent_index)];
  std::vector<TransitionTuple> out;
  out.reserve(static_cast<std::size_t>(batch));

  switch (scheme.kind) {
    case ShareSchemeKind::kNone: {
      if (own.empty()) {
        throw std::logic_error("build_minibatch: own buffer empty");
      }
      for (int i = 0; i < batch; ++i) out.push_back(own.sample(rng));
      break;
    }
    case ShareSchemeKind::kGlobal: {
      for (int i = 0; i < batch; ++i) out.push_back(sample_union(buffers, rng));
      break;
    }
    case ShareSchemeKind::kSeedSampling: {
      const double z = scheme.seed_noise.at(static_cast<std::size_t>(agent_index));
      for (int i = 0; i < batch; ++i) {
        TransitionTuple t = sample_union(buffers, rng);
        t.r += z;
        out.push_back(std::move(t));
      }
      break;
    }
    case ShareSchemeKind::kSimilarity: {
      const auto& quotas = scheme.allocation.k_bar;
      if (quotas.rows() != static_cast<Eigen::Index>(buffers.size())) {
        throw std::invalid_argument("build_minibatch: allocation size mismatch");
      }
      for (Eigen::Index q = 0; q < quotas.cols(); ++q) {
        int quota = quotas(agent_index, q);
        if (quota <= 0) continue;
        const ReplayBuffer* src = &buffers[static_cast<std::size_t>(q)];
        if (src->empty()) {
          src = &own;
          if (reallocations) *reallocations += quota;
        }
        if (src->empty()) {
          throw std::logic_error("build_minibatch: no data available");
        }
        for (int i = 0; i < quota; ++i) out.push_back(src->sample(rng));
      }
      break;
    }
  }
  return out;
}

double TrainingLog::mean_return(int first_epoch, int last_epoch) const {
  double sum = 0.0;
  int count = 0;
  for (const auto& e : episodes) {
    if (e.epoch >= first_epoch && e.epoch <= last_epoch) {
      sum += e.episode_return;
      count += 1;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

TrainingLog train_concurrent(const std::vector<EnvSpec>& envs,
                             std::vector<DdpgAgent>& agents,
                             const ShareScheme& scheme,
                             const TrainConfig& config) {
  const std::size_t n = envs.size();
  if (agents.size() != n) {
    throw std::invalid_argument("train_concurrent: envs/agents size mismatch");
  }
  TrainingLog log;
  if (n == 0 || config.epochs <= 0) return log;

  std::vector<int> ids = config.agent_ids;
  if (ids.empty()) {
    ids.resize(n);
    std::iota(ids.begin(), ids.end(), 0);
  }
  if (ids.size() != n) {
    throw std::invalid_argument("train_concurrent: agent_ids size mismatch");
  }

  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    streams.push_back(Rng::fork(config.seed, static_cast<std::uint64_t>(ids[i])));
  }

  std::vector<ReplayBuffer> buffers(n, ReplayBuffer(config.buffer_capacity));
  std::vector<OuNoise> noises(n);
  std::vector<EnvState> states(n);

  double sigma1 = config.sigma1;
  double sigma2 = config.sigma2;
  for (std::size_t i = 0; i < n; ++i) {
    const double bound = agents[i].action_bound;
    if (sigma1 < 0.0) sigma1 = 0.6 * bound;
    if (sigma2 < 0.0) sigma2 = 0.3 * bound;
    noises[i].theta_rate = config.ou_theta;
    noises[i].dt = envs[i].dt > 0.0 ? envs[i].dt : 1.0;
  }

  std::vector<double> returns(n, 0.0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const int steps = config.steps_per_epoch > 0 ? config.steps_per_epoch
                                                 : envs[0].horizon;
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = sample_episode_means(1, sigma1, streams[i])[0];
      noises[i].reset(mu);
      noises[i].sigma = sigma2;
      states[i] = reset_env(envs[i], streams[i]);
      returns[i] = 0.0;
    }
    for (int t = 0; t < steps; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd action =
            select_action(agents[i], states[i].obs, noises[i], streams[i]);
        auto [next, r] = env_step(envs[i], states[i], action, streams[i]);
        buffers[i].push({states[i].obs, action, r, next.obs});
        returns[i] += r;
        states[i] = std::move(next);
      }
      std::tie(sigma1, sigma2) = anneal(sigma1, sigma2, config.decay);
      for (std::size_t i = 0; i < n; ++i) noises[i].sigma = sigma2;
      for (std::size_t i = 0; i < n; ++i) {
        if (buffers[i].size() < static_cast<std::size_t>(config.batch)) continue;
        const auto batch =
            build_minibatch(buffers, scheme, static_cast<int>(i), config.batch,
                            streams[i], &log.buffer_reallocations);
        const UpdateResult ur = ddpg_update(agents[i], batch);
        if (ur.skipped) {
          log.skipped_updates += 1;
          if (agents[i].divergence_count > config.divergence_tolerance) {
            throw OptimizationDiverged(
                "train_concurrent: agent diverged beyond tolerance",
                agents[i].critic.params);
          }
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      log.episodes.push_back({epoch, static_cast<int>(i), returns[i]});
    }
  }
  return log;
}

}  // namespace cccrl
