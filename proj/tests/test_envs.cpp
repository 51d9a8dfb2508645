#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cccrl/envs.hpp"
#include "cccrl/rng.hpp"

using namespace cccrl;

namespace {

EnvSpec make_spec(EnvKind kind) {
  EnvSpec spec;
  spec.kind = kind;
  return with_defaults(spec);
}

EnvState pendulum_state(double th, double thdot) {
  EnvState st;
  st.obs.resize(3);
  st.obs << std::cos(th), std::sin(th), thdot;
  return st;
}

EnvState cartpole_state(double x, double xdot, double th, double thdot) {
  EnvState st;
  st.obs.resize(5);
  st.obs << x, xdot, std::cos(th), std::sin(th), thdot;
  return st;
}

}  // namespace

TEST_CASE("ar step follows the linear evolution and reward") {
  EnvSpec spec = make_spec(EnvKind::kAr);
  spec.noise_sd = 0.0;
  spec.target = 0.0;
  Rng rng(1);
  const auto [s_next, r1] = ar_step(spec, 1.0, 0.0, rng);
  CHECK(s_next == doctest::Approx(0.95).epsilon(1e-15));

  spec.target = 2.5;
  const auto [sn2, r_at_target] = ar_step(spec, 2.5, 0.0, rng);
  CHECK(r_at_target == doctest::Approx(1.0));
  const auto [sn3, r_ln2] = ar_step(spec, 2.5 + std::log(2.0), 0.0, rng);
  CHECK(r_ln2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ar transitions are exactly linear without noise") {
  EnvSpec spec = make_spec(EnvKind::kAr);
  spec.noise_sd = 0.0;
  Rng rng(2);
  const double delta = 0.37;
  const auto [a1, r1] = ar_step(spec, 1.2, 0.4, rng);
  const auto [a2, r2] = ar_step(spec, 1.2 + delta, 0.4, rng);
  CHECK(a2 - a1 == doctest::Approx(spec.phi * delta).epsilon(1e-12));
}

TEST_CASE("sparse reward trades the exponential payoff against action cost") {
  EnvSpec spec = make_spec(EnvKind::kArSparse);
  spec.target = -20.0;
  CHECK(ar_sparse_reward(spec, -20.0, 0.0) == doctest::Approx(100.0));
  CHECK(ar_sparse_reward(spec, -20.0, 10.0) == doctest::Approx(90.0));
  CHECK(ar_sparse_reward(spec, 0.0, 0.0) ==
        doctest::Approx(100.0 * std::exp(-20.0)).epsilon(1e-9));
}

TEST_CASE("pendulum equilibria produce zero angular acceleration") {
  EnvSpec spec = make_spec(EnvKind::kPendulumWind);
  spec.wind = 0.0;
  Rng rng(3);
  for (double th : {0.0, 3.14159265358979323846}) {
    const EnvState st = pendulum_state(th, 0.0);
    const auto [next, r] = pendulum_step(spec, st, 0.0, rng);
    CHECK(next.obs[2] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("wind torque at the upright pose matches the constants") {
  // thddot = 3 w / (2 m l) cos(0) = 6 for w = 4, m = l = 1
  EnvSpec spec = make_spec(EnvKind::kPendulumWind);
  spec.wind = 4.0;
  Rng rng(4);
  const EnvState st = pendulum_state(0.0, 0.0);
  const auto [next, r] = pendulum_step(spec, st, 0.0, rng);
  CHECK(next.obs[2] == doctest::Approx(6.0 * spec.dt).epsilon(1e-12));
}

TEST_CASE("pendulum angular velocity is capped at 8") {
  EnvSpec spec = make_spec(EnvKind::kPendulumWind);
  Rng rng(5);
  EnvState st = pendulum_state(1.5, 7.9);
  for (int i = 0; i < 50; ++i) {
    auto [next, r] = pendulum_step(spec, st, 2.0, rng);
    CHECK(std::abs(next.obs[2]) <= 8.0);
    st = next;
  }
}

TEST_CASE("pendulum reward is non-positive and penalizes displacement") {
  EnvSpec spec = make_spec(EnvKind::kPendulumWind);
  Rng rng(6);
  const auto [n1, r_upright] = pendulum_step(spec, pendulum_state(0, 0), 0, rng);
  CHECK(r_upright == doctest::Approx(0.0));
  const auto [n2, r_off] = pendulum_step(spec, pendulum_state(1.0, 1.0), 1.0, rng);
  CHECK(r_off < 0.0);
  CHECK(r_off == doctest::Approx(-(1.0 + 0.1 + 0.001)).epsilon(1e-12));
}

TEST_CASE("cartpole rewards the pose cosine") {
  EnvSpec spec = make_spec(EnvKind::kCartpoleGravity);
  Rng rng(7);
  const auto [n1, r_up] = cartpole_step(spec, cartpole_state(0, 0, 0, 0), 0, rng);
  CHECK(r_up == doctest::Approx(1.0));
  const auto [n2, r_down] =
      cartpole_step(spec, cartpole_state(0, 0, 3.14159265358979323846, 0), 0, rng);
  CHECK(r_down == doctest::Approx(-1.0));
}

TEST_CASE("cartpole clips to the track and zeroes the velocity there") {
  EnvSpec spec = make_spec(EnvKind::kCartpoleGravity);
  Rng rng(8);
  EnvState st = cartpole_state(2.39, 3.0, 3.0, 0.0);
  const auto [next, r] = cartpole_step(spec, st, 10.0, rng);
  CHECK(next.obs[0] <= 2.4);
  if (next.obs[0] == 2.4) CHECK(next.obs[1] == 0.0);
}

TEST_CASE("passive cartpole conserves energy within two percent") {
  EnvSpec spec = make_spec(EnvKind::kCartpoleGravity);
  spec.gravity = 9.82;
  Rng rng(9);
  EnvState st = reset_env(spec, rng);
  const double e0 = cartpole_energy(spec, st);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    auto [next, r] = cartpole_step(spec, st, 0.0, rng);
    worst = std::max(worst, std::abs(cartpole_energy(spec, next) - e0));
    st = next;
  }
  CHECK(worst <= 0.02 * std::abs(e0));
}

TEST_CASE("trig components stay normalized across long rollouts") {
  for (EnvKind kind : {EnvKind::kPendulumWind, EnvKind::kCartpoleGravity}) {
    EnvSpec spec = make_spec(kind);
    Rng rng(10);
    EnvState st = reset_env(spec, rng);
    const int cos_idx = kind == EnvKind::kPendulumWind ? 0 : 2;
    for (int t = 0; t < 500; ++t) {
      const Eigen::VectorXd a =
          Eigen::VectorXd::Constant(1, rng.uniform(-spec.action_bound,
                                                   spec.action_bound));
      auto [next, r] = env_step(spec, st, a, rng);
      const double norm = next.obs[cos_idx] * next.obs[cos_idx] +
                          next.obs[cos_idx + 1] * next.obs[cos_idx + 1];
      CHECK(std::abs(norm - 1.0) <= 1e-9);
      st = next;
    }
  }
}

TEST_CASE("env_step clips out-of-bound actions instead of failing") {
  EnvSpec spec = make_spec(EnvKind::kPendulumWind);
  Rng rng(11);
  const EnvState st = pendulum_state(0.5, 0.0);
  const auto [a1, r1] =
      env_step(spec, st, Eigen::VectorXd::Constant(1, 100.0), rng);
  Rng rng2(11);
  const auto [a2, r2] =
      env_step(spec, st, Eigen::VectorXd::Constant(1, spec.action_bound), rng2);
  CHECK(a1.obs == a2.obs);
  CHECK(r1 == r2);
}

TEST_CASE("group sampling honours the group structure") {
  std::vector<GroupSpec> groups(3);
  groups[0] = {"target", -4.0, 0.0, 20};
  groups[1] = {"target", -1.0, 0.0, 20};
  groups[2] = {"target", 4.0, 0.0, 20};
  const SampledEnvs envs = sample_env_group(EnvKind::kAr, groups, 5);
  REQUIRE(envs.specs.size() == 60);
  REQUIRE(envs.labels.size() == 60);
  for (int i = 0; i < 60; ++i) {
    CHECK(envs.labels[i] == i / 20);
    const double expected = groups[static_cast<std::size_t>(i / 20)].mean;
    CHECK(envs.specs[static_cast<std::size_t>(i)].target == expected);
  }
}

TEST_CASE("group sampling is deterministic and spread by sd") {
  std::vector<GroupSpec> groups(1);
  groups[0] = {"wind", 1.5, 0.1, 10};
  const SampledEnvs a = sample_env_group(EnvKind::kPendulumWind, groups, 9);
  const SampledEnvs b = sample_env_group(EnvKind::kPendulumWind, groups, 9);
  double spread = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(a.specs[i].wind == b.specs[i].wind);
    spread = std::max(spread, std::abs(a.specs[i].wind - 1.5));
  }
  CHECK(spread > 0.0);
  CHECK(spread < 1.0);
}

TEST_CASE("group sampling rejects unknown parameters") {
  std::vector<GroupSpec> groups(1);
  groups[0] = {"temperature", 0.0, 1.0, 2};
  CHECK_THROWS_AS(sample_env_group(EnvKind::kAr, groups, 0),
                  std::invalid_argument);
}

TEST_CASE("rewards stay within their documented ranges") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    for (EnvKind kind : {EnvKind::kAr, EnvKind::kArSparse,
                         EnvKind::kPendulumWind, EnvKind::kCartpoleGravity}) {
      EnvSpec spec = make_spec(kind);
      spec.target = 3.0;
      EnvState st = reset_env(spec, rng);
      for (int t = 0; t < 50; ++t) {
        const Eigen::VectorXd a = Eigen::VectorXd::Constant(
            1, rng.uniform(-spec.action_bound, spec.action_bound));
        auto [next, r] = env_step(spec, st, a, rng);
        switch (kind) {
          case EnvKind::kAr:
            CHECK(r > 0.0);
            CHECK(r <= 1.0);
            break;
          case EnvKind::kArSparse:
            CHECK(r <= 100.0);
            break;
          case EnvKind::kPendulumWind:
            CHECK(r <= 0.0);
            break;
          case EnvKind::kCartpoleGravity:
            CHECK(r >= -1.0);
            CHECK(r <= 1.0);
            break;
        }
        st = next;
      }
    }
  }
}
