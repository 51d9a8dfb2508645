#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "cccrl/harness.hpp"

using namespace cccrl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentConfig tiny_ar_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.task = EnvKind::kAr;
  cfg.effect = EffectKind::kReward;
  cfg.samples = 20;
  cfg.interval_lo = -10.0;
  cfg.interval_hi = 10.0;
  cfg.groups = {{"target", -4.0, 0.1, 3},
                {"target", -1.0, 0.1, 3},
                {"target", 4.0, 0.1, 3}};
  cfg.components = 3;
  cfg.seeds = {5};
  cfg.out_dir = out;
  cfg.anm.max_iters = 60;
  cfg.train.batch = 16;
  return cfg;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += (c == '\n');
  return n;
}

}  // namespace

TEST_CASE("cause coordinate picks the angular velocity for swing-up tasks") {
  Eigen::VectorXd ar(1);
  ar << 2.5;
  CHECK(cause_coordinate(EnvKind::kAr, ar) == 2.5);
  Eigen::VectorXd pend(3);
  pend << 0.0, 1.0, -3.0;
  CHECK(cause_coordinate(EnvKind::kPendulumWind, pend) == -3.0);
  Eigen::VectorXd cart(5);
  cart << 0.1, 0.2, 0.0, 1.0, 4.5;
  CHECK(cause_coordinate(EnvKind::kCartpoleGravity, cart) == 4.5);
}

TEST_CASE("cause matrix rows share one base sample up to jitter") {
  std::vector<GroupSpec> groups = {{"target", -4.0, 0.0, 2},
                                   {"target", 4.0, 0.0, 2}};
  const SampledEnvs envs = sample_env_group(EnvKind::kAr, groups, 3);
  const CauseEffectDataset ds =
      generate_cause_effect(envs.specs, 50, -10.0, 10.0, EffectKind::kReward, 1);
  REQUIRE(ds.cause.rows() == 4);
  REQUIRE(ds.cause.cols() == 50);
  for (Eigen::Index i = 1; i < 4; ++i) {
    const double max_gap =
        (ds.cause.row(i) - ds.cause.row(0)).cwiseAbs().maxCoeff();
    CHECK(max_gap < 0.1);   // jitter only
    CHECK(max_gap > 0.0);   // but never identical
  }
}

TEST_CASE("identical hidden parameters give identical effect rows") {
  std::vector<GroupSpec> groups = {{"target", -4.0, 0.0, 2}};
  const SampledEnvs envs = sample_env_group(EnvKind::kAr, groups, 3);
  const CauseEffectDataset ds =
      generate_cause_effect(envs.specs, 40, -10.0, 10.0, EffectKind::kReward, 1);
  // same target, same rollout stream: effects can differ only through the
  // jittered causes feeding the nearest-neighbour lookup
  int agreements = 0;
  for (Eigen::Index j = 0; j < 40; ++j) {
    agreements += ds.effect(0, j) == ds.effect(1, j);
  }
  CHECK(agreements > 30);
}

TEST_CASE("generated effects track the reward mechanism") {
  std::vector<GroupSpec> groups = {{"target", -4.0, 0.0, 1},
                                   {"target", 4.0, 0.0, 1}};
  const SampledEnvs envs = sample_env_group(EnvKind::kAr, groups, 7);
  const CauseEffectDataset ds = generate_cause_effect(
      envs.specs, 100, -10.0, 10.0, EffectKind::kReward, 2);
  // correlation between y(s) and exp(-|s - target|) should be strong
  for (Eigen::Index agent = 0; agent < 2; ++agent) {
    const double target = envs.specs[static_cast<std::size_t>(agent)].target;
    Eigen::VectorXd expected(100);
    for (Eigen::Index j = 0; j < 100; ++j) {
      expected[j] = std::exp(-std::abs(ds.cause(agent, j) - target));
    }
    const Eigen::VectorXd actual = ds.effect.row(agent);
    const Eigen::VectorXd ec = expected.array() - expected.mean();
    const Eigen::VectorXd ac = actual.array() - actual.mean();
    const double corr = ec.dot(ac) / (ec.norm() * ac.norm());
    CHECK(corr > 0.9);
    CHECK(actual.minCoeff() > 0.0);
    CHECK(actual.maxCoeff() <= 1.0);
  }
}

TEST_CASE("pendulum effects are next-state angular velocities") {
  std::vector<GroupSpec> groups = {{"wind", 1.5, 0.0, 2}};
  const SampledEnvs envs = sample_env_group(EnvKind::kPendulumWind, groups, 5);
  const CauseEffectDataset ds = generate_cause_effect(
      envs.specs, 30, -8.0, 8.0, EffectKind::kNextState, 4);
  CHECK(ds.effect.cwiseAbs().maxCoeff() <= 8.0);
}

TEST_CASE("dataset generation is deterministic") {
  std::vector<GroupSpec> groups = {{"target", 1.0, 0.2, 3}};
  const SampledEnvs envs = sample_env_group(EnvKind::kAr, groups, 11);
  const CauseEffectDataset a =
      generate_cause_effect(envs.specs, 25, -5.0, 5.0, EffectKind::kReward, 9);
  const CauseEffectDataset b =
      generate_cause_effect(envs.specs, 25, -5.0, 5.0, EffectKind::kReward, 9);
  CHECK(a.cause == b.cause);
  CHECK(a.effect == b.effect);
}

TEST_CASE("adjusted rand index reference points") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  CHECK(adjusted_rand_index(truth, truth) == 1.0);
  const std::vector<int> renamed = {5, 5, 9, 9, 7, 7};
  CHECK(adjusted_rand_index(truth, renamed) == 1.0);
  const std::vector<int> single = {0, 0, 0, 0, 0, 0};
  CHECK(adjusted_rand_index(single, truth) == doctest::Approx(0.0));
}

TEST_CASE("random labelings score near zero ari") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> a(60), b(60);
    for (int i = 0; i < 60; ++i) {
      a[i] = static_cast<int>(rng.below(3));
      b[i] = static_cast<int>(rng.below(3));
    }
    CHECK(std::abs(adjusted_rand_index(a, b)) < 0.1);
  }
}

TEST_CASE("clustering quality is perfect on separated blobs") {
  Rng rng(17);
  Eigen::MatrixXd theta(20, 1);
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) {
    labels[i] = i < 10 ? 0 : 1;
    theta(i, 0) = (i < 10 ? -5.0 : 5.0) + rng.normal(0.0, 0.2);
  }
  const ClusterQuality q = clustering_quality(theta, labels, 0);
  CHECK(q.ari == doctest::Approx(1.0));
  CHECK(q.silhouette > 0.9);
}

TEST_CASE("config echo round-trips through the parser") {
  ExperimentConfig cfg = tiny_ar_config("out_dir_x");
  cfg.scheme = ShareSchemeKind::kSeedSampling;
  cfg.train.epochs = 42;
  cfg.components = -1;
  const std::string echoed = echo_config(cfg);
  const ExperimentConfig reparsed = parse_config(echoed);
  CHECK(echo_config(reparsed) == echoed);
}

TEST_CASE("unknown keys and malformed lines are rejected") {
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("task ar\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[train]\nscheme = mystery\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config("samples = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("interval = 4 4\n"), std::invalid_argument);
}

TEST_CASE("comments and blank lines are tolerated") {
  const ExperimentConfig cfg = parse_config(
      "# a comment\n"
      "task = ar_sparse   # trailing comment\n"
      "\n"
      "samples = 30\n");
  CHECK(cfg.task == EnvKind::kArSparse);
  CHECK(cfg.samples == 30);
}

TEST_CASE("extraction artifacts appear and are byte-stable") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "cccrl_extract_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = tiny_ar_config((dir / "a").string());
  const RunArtifacts art = run_extract(cfg);
  const auto theta_path = dir / "a" / "s5" / "theta.csv";
  REQUIRE(std::filesystem::exists(theta_path));
  const std::string first = slurp(theta_path);
  CHECK(count_lines(first) == 10);  // header + 9 agents

  // allocation rows sum to the batch size
  const std::string alloc = slurp(dir / "a" / "s5" / "allocation.csv");
  std::istringstream lines(alloc);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    int sum = 0;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    int v;
    while (fields >> v) sum += v;
    CHECK(sum == cfg.train.batch);
  }

  cfg.out_dir = (dir / "b").string();
  run_extract(cfg);
  CHECK(slurp(dir / "b" / "s5" / "theta.csv") == first);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training pipeline writes deterministic curves") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "cccrl_train_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg;
  cfg.task = EnvKind::kAr;
  cfg.samples = 10;
  cfg.groups = {{"target", 0.0, 0.1, 2}};
  cfg.seeds = {3};
  cfg.scheme = ShareSchemeKind::kNone;
  cfg.train.epochs = 2;
  cfg.train.steps_per_epoch = 6;
  cfg.train.batch = 4;
  cfg.ddpg.actor_hidden = {8};
  cfg.ddpg.critic_hidden = {8, 8};
  cfg.out_dir = (dir / "a").string();

  const RunArtifacts art = run_pipeline(cfg);
  const auto curves_path = dir / "a" / "curves.csv";
  REQUIRE(std::filesystem::exists(curves_path));
  const std::string first = slurp(curves_path);
  CHECK(count_lines(first) == 1 + 2 * 2);  // header + epochs x agents

  // scheme none skips the extraction stage entirely
  CHECK(!std::filesystem::exists(dir / "a" / "s3" / "theta.csv"));

  cfg.out_dir = (dir / "b").string();
  run_pipeline(cfg);
  CHECK(slurp(dir / "b" / "curves.csv") == first);

  // the echoed config reproduces the run when re-parsed
  const ExperimentConfig echoed =
      parse_config(slurp(dir / "a" / "config_echo.cfg"));
  CHECK(echoed.train.epochs == cfg.train.epochs);
  CHECK(echoed.scheme == cfg.scheme);
  std::filesystem::remove_all(dir);
}

TEST_CASE("similarity training consumes the allocation it extracted") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "cccrl_sim_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = tiny_ar_config((dir / "a").string());
  cfg.scheme = ShareSchemeKind::kSimilarity;
  cfg.train.epochs = 1;
  cfg.train.steps_per_epoch = 20;
  cfg.train.batch = 16;
  cfg.ddpg.actor_hidden = {8};
  cfg.ddpg.critic_hidden = {8, 8};
  const RunArtifacts art = run_pipeline(cfg);
  CHECK(std::filesystem::exists(dir / "a" / "s5" / "theta.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "curves.csv"));
  REQUIRE(!art.results.empty());
  CHECK(art.results[0].extracted);
  CHECK(art.results[0].allocation.k_bar.rows() == 9);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reproduce plans cover the documented figures") {
  CHECK(reproduce_plan("fig2", "x").size() == 4);
  CHECK(reproduce_plan("fig3", "x").size() == 4);
  CHECK(reproduce_plan("fig4", "x").size() == 2);
  CHECK(reproduce_plan("fig5", "x").size() == 4);
  CHECK(reproduce_plan("fig6", "x").size() == 4);
  CHECK_THROWS_AS(reproduce_plan("fig7", "x"), std::invalid_argument);
  for (const auto& entry : reproduce_plan("fig3", "x")) {
    CHECK(entry.extract_only);
  }
  // uncoordinated variant pins the exploration mean scale at zero
  const auto fig4 = reproduce_plan("fig4", "x");
  CHECK(fig4[1].config.train.sigma1 == 0.0);
  CHECK(fig4[0].config.train.sigma1 < 0.0);
}
