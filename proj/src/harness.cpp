#include "cccrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cccrl/csv.hpp"
#include "cccrl/kernels.hpp"

namespace cccrl {

namespace {

constexpr double kCauseJitterSd = 1e-2;  // variance 1e-4

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_double(std::uint64_t h, double v) {
  return mix64(h ^ std::bit_cast<std::uint64_t>(v));
}

// stream id derived from the hidden parameters, so identical environments
// roll out identical random-policy datasets
std::uint64_t env_stream_id(const EnvSpec& spec) {
  std::uint64_t h = static_cast<std::uint64_t>(spec.kind) + 1;
  h = hash_double(h, spec.phi);
  h = hash_double(h, spec.noise_sd);
  h = hash_double(h, spec.target);
  h = hash_double(h, spec.wind);
  h = hash_double(h, spec.gravity);
  return h;
}

}  // namespace

double cause_coordinate(EnvKind kind, const Eigen::VectorXd& obs) {
  switch (kind) {
    case EnvKind::kAr:
    case EnvKind::kArSparse:
      return obs[0];
    case EnvKind::kPendulumWind:
      return obs[2];
    case EnvKind::kCartpoleGravity:
      return obs[4];
  }
  return obs[0];
}

double reward_scale(EnvKind kind) {
  switch (kind) {
    case EnvKind::kAr:
      return 1.0;
    case EnvKind::kArSparse:
      return 100.0;
    case EnvKind::kPendulumWind:
      return 10.0;
    case EnvKind::kCartpoleGravity:
      return 1.0;
  }
  return 1.0;
}

CauseEffectDataset generate_cause_effect(const std::vector<EnvSpec>& envs,
                                         Eigen::Index p, double lo, double hi,
                                         EffectKind effect,
                                         std::uint64_t seed) {
  if (p < 2) {
    throw std::invalid_argument("generate_cause_effect: need P >= 2");
  }
  if (envs.empty()) {
    throw std::invalid_argument("generate_cause_effect: no environments");
  }
  Rng master(seed);
  const Eigen::Index n = static_cast<Eigen::Index>(envs.size());
  Eigen::VectorXd base(p);
  for (Eigen::Index i = 0; i < p; ++i) base[i] = master.uniform(lo, hi);

  CauseEffectDataset ds;
  ds.cause.resize(n, p);
  ds.effect.resize(n, p);

  const Eigen::Index rollout = 10 * p;
  for (Eigen::Index a = 0; a < n; ++a) {
    const EnvSpec spec = with_defaults(envs[static_cast<std::size_t>(a)]);
    for (Eigen::Index i = 0; i < p; ++i) {
      ds.cause(a, i) = base[i] + master.normal(0.0, kCauseJitterSd);
    }

    // random-policy dataset D_n, keyed by the hidden parameters
    Rng stream = Rng::fork(seed, env_stream_id(spec));
    Eigen::VectorXd cause_pts(rollout), effects(rollout);
    EnvState st = reset_env(spec, stream);
    for (Eigen::Index m = 0; m < rollout; ++m) {
      if (st.t >= spec.horizon) st = reset_env(spec, stream);
      Eigen::VectorXd action = Eigen::VectorXd::Constant(
          1, stream.uniform(-spec.action_bound, spec.action_bound));
      auto [next, r] = env_step(spec, st, action, stream);
      cause_pts[m] = cause_coordinate(spec.kind, st.obs);
      effects[m] = effect == EffectKind::kReward
                       ? r
                       : cause_coordinate(spec.kind, next.obs);
      st = std::move(next);
    }

    // nearest neighbour on the cause coordinate
    for (Eigen::Index i = 0; i < p; ++i) {
      Eigen::Index arg = 0;
      (cause_pts.array() - ds.cause(a, i)).abs().minCoeff(&arg);
      ds.effect(a, i) = effects[arg];
    }
  }
  return ds;
}

double adjusted_rand_index(const std::vector<int>& a,
                           const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("adjusted_rand_index: label size mismatch");
  }
  const auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> cont;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cont[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  // identical partitions score 1 regardless of degeneracy
  if (cont.size() == ra.size() && cont.size() == rb.size()) {
    return 1.0;
  }
  double sum_nij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, v] : cont) sum_nij += comb2(v);
  for (const auto& [k, v] : ra) sum_a += comb2(v);
  for (const auto& [k, v] : rb) sum_b += comb2(v);
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (std::abs(max_index - expected) < 1e-12) return 0.0;
  return (sum_nij - expected) / (max_index - expected);
}

double silhouette_score(const Eigen::MatrixXd& points,
                        const std::vector<int>& labels) {
  const Eigen::Index n = points.rows();
  if (static_cast<std::size_t>(n) != labels.size() || n < 2) {
    throw std::invalid_argument("silhouette_score: bad inputs");
  }
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) return 0.0;

  const Eigen::MatrixXd d2 = pairwise_sq_dist(points, points);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> per_cluster;  // sum dist, count
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      auto& entry = per_cluster[labels[static_cast<std::size_t>(j)]];
      entry.first += std::sqrt(d2(i, j));
      entry.second += 1;
    }
    const int own = labels[static_cast<std::size_t>(i)];
    const auto own_it = per_cluster.find(own);
    if (own_it == per_cluster.end()) {
      continue;  // singleton cluster contributes 0
    }
    const double a_val = own_it->second.first / own_it->second.second;
    double b_val = std::numeric_limits<double>::infinity();
    for (const auto& [lbl, sum_count] : per_cluster) {
      if (lbl == own) continue;
      b_val = std::min(b_val, sum_count.first / sum_count.second);
    }
    total += (b_val - a_val) / std::max(a_val, b_val);
  }
  return total / static_cast<double>(n);
}

ClusterQuality clustering_quality(const Eigen::MatrixXd& theta,
                                  const std::vector<int>& labels,
                                  std::uint64_t seed) {
  std::set<int> distinct(labels.begin(), labels.end());
  const int c = std::max<int>(1, static_cast<int>(distinct.size()));
  const GmmFit fit = fit_gmm_em(theta, c, seed);
  ClusterQuality q;
  q.assignments = hard_assignments(fit.model, theta);
  q.ari = adjusted_rand_index(q.assignments, labels);
  q.silhouette = silhouette_score(theta, q.assignments);
  return q;
}

SeedRunResult run_seed(const ExperimentConfig& config, std::uint64_t seed,
                       bool do_train) {
  SeedRunResult res;
  res.seed = seed;
  res.envs = sample_env_group(config.base_env(), config.groups, seed);
  const int n = static_cast<int>(res.envs.specs.size());
  if (n == 0) {
    throw std::invalid_argument("run_seed: no agents configured");
  }

  const bool needs_extraction =
      !do_train || config.scheme == ShareSchemeKind::kSimilarity;
  if (needs_extraction) {
    const CauseEffectDataset ds = generate_cause_effect(
        res.envs.specs, config.samples, config.interval_lo, config.interval_hi,
        config.effect, seed);
    AnmMmConfig anm = config.anm;
    anm.seed = seed;
    AnmMmFit fit_res = fit(ds, anm);
    if (fit_res.hsic_clamp_events > 0) {
      res.warnings.push_back("seed " + std::to_string(seed) + ": hsic clamped " +
                             std::to_string(fit_res.hsic_clamp_events) +
                             " times during extraction");
    }
    res.theta = fit_res.theta;
    res.extracted = true;

    int c = config.components;
    if (c == 0) c = static_cast<int>(config.groups.size());
    res.gmm = c < 0 ? fit_gmm_bic(res.theta, 8, seed)
                    : fit_gmm_em(res.theta, c, seed);
    const Eigen::MatrixXd v = responsibilities(res.gmm.model, res.theta);
    res.allocation = build_allocation(v, config.train.batch);
  }

  if (!do_train) return res;

  ShareScheme scheme;
  scheme.kind = config.scheme;
  if (config.scheme == ShareSchemeKind::kSimilarity) {
    scheme.allocation = res.allocation;
  } else if (config.scheme == ShareSchemeKind::kSeedSampling) {
    scheme.seed_noise.resize(static_cast<std::size_t>(n));
    const double scale = config.seed_noise_sd * reward_scale(config.task);
    for (int i = 0; i < n; ++i) {
      Rng z_stream = Rng::fork(seed, 0x200000ULL + static_cast<std::uint64_t>(i));
      scheme.seed_noise[static_cast<std::size_t>(i)] = z_stream.normal(0.0, scale);
    }
  }

  std::vector<DdpgAgent> agents;
  agents.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const EnvSpec& spec = res.envs.specs[static_cast<std::size_t>(i)];
    Rng init_stream = Rng::fork(seed, 0x100000ULL + static_cast<std::uint64_t>(i));
    agents.push_back(make_ddpg_agent(obs_dim(spec.kind), action_dim(spec.kind),
                                     spec.action_bound, config.ddpg,
                                     init_stream));
  }

  TrainConfig tc = config.train;
  tc.seed = seed;
  res.log = train_concurrent(res.envs.specs, agents, scheme, tc);
  if (res.log.skipped_updates > 0) {
    res.warnings.push_back("seed " + std::to_string(seed) + ": " +
                           std::to_string(res.log.skipped_updates) +
                           " updates skipped on non-finite losses");
  }
  if (res.log.buffer_reallocations > 0) {
    res.warnings.push_back("seed " + std::to_string(seed) + ": " +
                           std::to_string(res.log.buffer_reallocations) +
                           " empty-buffer quota reallocations");
  }
  return res;
}

namespace {

void write_seed_artifacts(const ExperimentConfig& config,
                          const SeedRunResult& res, RunArtifacts& art) {
  const std::filesystem::path seed_dir =
      art.out_dir / ("s" + std::to_string(res.seed));
  if (res.extracted) {
    std::vector<std::string> header = {"agent_id", "group_label"};
    for (Eigen::Index q = 0; q < res.theta.cols(); ++q) {
      header.push_back("theta_" + std::to_string(q));
    }
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < res.theta.rows(); ++i) {
      std::vector<std::string> row = {
          std::to_string(i),
          std::to_string(res.envs.labels[static_cast<std::size_t>(i)])};
      for (Eigen::Index q = 0; q < res.theta.cols(); ++q) {
        row.push_back(format_double(res.theta(i, q)));
      }
      rows.push_back(std::move(row));
    }
    write_csv_atomic(seed_dir / "theta.csv", header, rows);
    art.files.push_back(seed_dir / "theta.csv");

    std::vector<std::string> aheader;
    for (Eigen::Index q = 0; q < res.allocation.k_bar.cols(); ++q) {
      aheader.push_back("q" + std::to_string(q));
    }
    std::vector<std::vector<std::string>> arows;
    for (Eigen::Index i = 0; i < res.allocation.k_bar.rows(); ++i) {
      std::vector<std::string> row;
      for (Eigen::Index q = 0; q < res.allocation.k_bar.cols(); ++q) {
        row.push_back(std::to_string(res.allocation.k_bar(i, q)));
      }
      arows.push_back(std::move(row));
    }
    write_csv_atomic(seed_dir / "allocation.csv", aheader, arows);
    art.files.push_back(seed_dir / "allocation.csv");
  }
  (void)config;
}

RunArtifacts run_common(const ExperimentConfig& config, bool do_train,
                        int jobs) {
  RunArtifacts art;
  art.out_dir = config.out_dir;
  std::filesystem::create_directories(art.out_dir);

  const int n_jobs = jobs > 0 ? jobs
                              : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SeedRunResult> results(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= config.seeds.size()) return;
      try {
        results[idx] = run_seed(config, config.seeds[idx], do_train);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
        return;
      }
    }
  };
  const int workers =
      std::min<int>(n_jobs, static_cast<int>(config.seeds.size()));
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) {
    throw std::runtime_error("pipeline: " + first_error);
  }

  for (const auto& res : results) {
    write_seed_artifacts(config, res, art);
    for (const auto& w : res.warnings) art.warnings.push_back(w);
  }

  if (do_train) {
    const std::vector<std::string> header = {"epoch",          "agent_id",
                                             "group_label",    "episode_return",
                                             "scheme",         "seed"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& res : results) {
      for (const auto& e : res.log.episodes) {
        rows.push_back({std::to_string(e.epoch), std::to_string(e.agent),
                        std::to_string(
                            res.envs.labels[static_cast<std::size_t>(e.agent)]),
                        format_double(e.episode_return),
                        share_scheme_name(config.scheme),
                        std::to_string(res.seed)});
      }
    }
    write_csv_atomic(art.out_dir / "curves.csv", header, rows);
    art.files.push_back(art.out_dir / "curves.csv");
  }

  write_text_atomic(art.out_dir / "config_echo.cfg", echo_config(config));
  art.files.push_back(art.out_dir / "config_echo.cfg");
  std::string warn_text;
  for (const auto& w : art.warnings) warn_text += w + "\n";
  write_text_atomic(art.out_dir / "warnings.log", warn_text);
  art.files.push_back(art.out_dir / "warnings.log");

  art.results = std::move(results);
  return art;
}

}  // namespace

RunArtifacts run_extract(const ExperimentConfig& config) {
  return run_common(config, /*do_train=*/false, 0);
}

RunArtifacts run_pipeline(const ExperimentConfig& config, int jobs) {
  return run_common(config, /*do_train=*/true, jobs);
}

}  // namespace cccrl
