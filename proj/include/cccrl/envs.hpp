#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cccrl/rng.hpp"

namespace cccrl {

enum class EnvKind { kAr, kArSparse, kPendulumWind, kCartpoleGravity };

std::string env_kind_name(EnvKind kind);
EnvKind env_kind_from_name(const std::string& name);

/// One agent's environment: task kind plus the hidden parameters that vary
/// across agents (target, wind, gravity, AR coefficient) and the fixed
/// simulation constants.
struct EnvSpec {
  EnvKind kind = EnvKind::kAr;
  double phi = 0.95;        // AR coefficient
  double noise_sd = 0.1;    // AR transition noise
  double target = 0.0;      // reward target s*
  double wind = 0.0;        // horizontal force on the pole [N]
  double gravity = 9.82;    // [m/s^2]
  double dt = 0.0;          // 0 -> kind default
  int horizon = 0;          // steps per episode, 0 -> kind default
  double action_bound = 0.0;  // 0 -> kind default

  // pendulum constants
  double pole_mass = 1.0;
  double pole_length = 1.0;
  // cart-pole constants
  double cart_mass = 1.0;
  double cp_pole_mass = 0.1;
  double cp_half_length = 0.5;
};

/// Fills dt / horizon / action_bound with the task defaults when unset.
EnvSpec with_defaults(EnvSpec spec);

/// Observation vector plus step counter. Angles are carried as
/// (cos, sin) pairs inside the observation itself:
///   ar / ar_sparse: [s]
///   pendulum:       [cos th, sin th, th_dot]
///   cart-pole:      [x, x_dot, cos th, sin th, th_dot]
struct EnvState {
  Eigen::VectorXd obs;
  int t = 0;
};

struct TransitionTuple {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  double r = 0.0;
  Eigen::VectorXd s_next;
};

int obs_dim(EnvKind kind);
int action_dim(EnvKind kind);

EnvState reset_env(const EnvSpec& spec, Rng& rng);

/// Dispatches on spec.kind; actions outside the bound are clipped.
/// Returns the next state and the reward of the transition.
std::pair<EnvState, double> env_step(const EnvSpec& spec, const EnvState& state,
                                     const Eigen::VectorXd& action, Rng& rng);

/// s' = phi s + a + eps with eps ~ N(0, noise_sd^2); r = exp(-|s - s*|)
/// evaluated at the current state.
std::pair<double, double> ar_step(const EnvSpec& spec, double s, double a,
                                  Rng& rng);

/// r = 100 exp(-|s - s*|) - a^2 / 10.
double ar_sparse_reward(const EnvSpec& spec, double s, double a);

std::pair<EnvState, double> pendulum_step(const EnvSpec& spec,
                                          const EnvState& state, double a,
                                          Rng& rng);

std::pair<EnvState, double> cartpole_step(const EnvSpec& spec,
                                          const EnvState& state, double a,
                                          Rng& rng);

/// Kinetic plus potential energy of the cart-pole in its current state;
/// constant for the passive frictionless system up to integration error.
double cartpole_energy(const EnvSpec& spec, const EnvState& state);

/// One group of agents whose hidden parameter is drawn from a Gaussian.
struct GroupSpec {
  std::string param;  // target | wind | gravity | phi | noise_sd
  double mean = 0.0;
  double sd = 0.0;
  int count = 1;
};

struct SampledEnvs {
  std::vector<EnvSpec> specs;
  std::vector<int> labels;  // group index per agent, evaluation only
};

SampledEnvs sample_env_group(EnvKind kind, const std::vector<GroupSpec>& groups,
                             std::uint64_t seed);

/// Same, but starting from a template spec carrying overridden constants.
SampledEnvs sample_env_group(const EnvSpec& base,
                             const std::vector<GroupSpec>& groups,
                             std::uint64_t seed);

}  // namespace cccrl
