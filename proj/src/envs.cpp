#include "cccrl/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace cccrl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMaxAngVel = 8.0;
constexpr double kTrackLimit = 2.4;
constexpr double kCartpoleResetNoiseSd = 5e-4;

double clip(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

double wrap_angle(double th) {
  th = std::fmod(th + kPi, 2.0 * kPi);
  if (th < 0.0) th += 2.0 * kPi;
  return th - kPi;
}

}  // namespace

std::string env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::kAr:
      return "ar";
    case EnvKind::kArSparse:
      return "ar_sparse";
    case EnvKind::kPendulumWind:
      return "pendulum_wind";
    case EnvKind::kCartpoleGravity:
      return "cartpole_gravity";
  }
  return "ar";
}

EnvKind env_kind_from_name(const std::string& name) {
  if (name == "ar") return EnvKind::kAr;
  if (name == "ar_sparse") return EnvKind::kArSparse;
  if (name == "pendulum_wind") return EnvKind::kPendulumWind;
  if (name == "cartpole_gravity") return EnvKind::kCartpoleGravity;
  throw std::invalid_argument("unknown environment kind: " + name);
}

EnvSpec with_defaults(EnvSpec spec) {
  switch (spec.kind) {
    case EnvKind::kAr:
    case EnvKind::kArSparse:
      if (spec.dt <= 0.0) spec.dt = 1.0;
      if (spec.horizon <= 0) spec.horizon = 100;
      if (spec.action_bound <= 0.0) spec.action_bound = 2.0;
      break;
    case EnvKind::kPendulumWind:
      if (spec.dt <= 0.0) spec.dt = 0.05;
      if (spec.horizon <= 0) spec.horizon = 200;
      if (spec.action_bound <= 0.0) spec.action_bound = 2.0;
      break;
    case EnvKind::kCartpoleGravity:
      if (spec.dt <= 0.0) spec.dt = 0.02;
      if (spec.horizon <= 0) spec.horizon = 300;
      if (spec.action_bound <= 0.0) spec.action_bound = 10.0;
      break;
  }
  return spec;
}

int obs_dim(EnvKind kind) {
  switch (kind) {
    case EnvKind::kAr:
    case EnvKind::kArSparse:
      return 1;
    case EnvKind::kPendulumWind:
      return 3;
    case EnvKind::kCartpoleGravity:
      return 5;
  }
  return 1;
}

int action_dim(EnvKind) { return 1; }

EnvState reset_env(const EnvSpec& spec, Rng& rng) {
  EnvState st;
  st.t = 0;
  switch (spec.kind) {
    case EnvKind::kAr:
    case EnvKind::kArSparse:
      st.obs = Eigen::VectorXd::Constant(1, rng.normal(0.0, 1.0));
      break;
    case EnvKind::kPendulumWind: {
      const double th = rng.uniform(-kPi, kPi);
      const double thdot = rng.uniform(-1.0, 1.0);
      st.obs.resize(3);
      st.obs << std::cos(th), std::sin(th), thdot;
      break;
    }
    case EnvKind::kCartpoleGravity: {
      // hanging start with small noise
      const double th = kPi + rng.normal(0.0, kCartpoleResetNoiseSd);
      st.obs.resize(5);
      st.obs << rng.normal(0.0, kCartpoleResetNoiseSd),
          rng.normal(0.0, kCartpoleResetNoiseSd), std::cos(th), std::sin(th),
          rng.normal(0.0, kCartpoleResetNoiseSd);
      break;
    }
  }
  return st;
}

std::pair<double, double> ar_step(const EnvSpec& spec, double s, double a,
                                  Rng& rng) {
  const double eps =
      spec.noise_sd > 0.0 ? rng.normal(0.0, spec.noise_sd) : 0.0;
  const double s_next = spec.phi * s + a + eps;
  const double r = std::exp(-std::abs(s - spec.target));
  return {s_next, r};
}

double ar_sparse_reward(const EnvSpec& spec, double s, double a) {
  return 100.0 * std::exp(-std::abs(s - spec.target)) - a * a / 10.0;
}

std::pair<EnvState, double> pendulum_step(const EnvSpec& spec,
                                          const EnvState& state, double a,
                                          Rng& rng) {
  (void)rng;
  const double u = clip(a, -spec.action_bound, spec.action_bound);
  const double cos_th = state.obs[0];
  const double sin_th = state.obs[1];
  const double thdot = state.obs[2];
  const double th = std::atan2(sin_th, cos_th);

  const double m = spec.pole_mass;
  const double l = spec.pole_length;
  const double thddot = 3.0 * spec.gravity / (2.0 * l) * sin_th +
                        3.0 / (m * l * l) * u +
                        3.0 * spec.wind / (2.0 * m * l) * cos_th;

  const double thdot_next =
      clip(thdot + thddot * spec.dt, -kMaxAngVel, kMaxAngVel);
  const double th_next = th + thdot_next * spec.dt;

  const double th_norm = wrap_angle(th);
  const double r =
      -(th_norm * th_norm + 0.1 * thdot * thdot + 0.001 * u * u);

  EnvState next;
  next.t = state.t + 1;
  next.obs.resize(3);
  next.obs << std::cos(th_next), std::sin(th_next), thdot_next;
  return {next, r};
}

std::pair<EnvState, double> cartpole_step(const EnvSpec& spec,
                                          const EnvState& state, double a,
                                          Rng& rng) {
  (void)rng;
  const double force = clip(a, -spec.action_bound, spec.action_bound);
  const double x = state.obs[0];
  const double xdot = state.obs[1];
  const double cos_th = state.obs[2];
  const double sin_th = state.obs[3];
  const double thdot = state.obs[4];
  const double th = std::atan2(sin_th, cos_th);

  const double mp = spec.cp_pole_mass;
  const double mc = spec.cart_mass;
  const double l = spec.cp_half_length;
  const double total_mass = mc + mp;

  const double temp =
      (force + mp * l * thdot * thdot * sin_th) / total_mass;
  const double thddot =
      (spec.gravity * sin_th - cos_th * temp) /
      (l * (4.0 / 3.0 - mp * cos_th * cos_th / total_mass));
  const double xddot = temp - mp * l * thddot * cos_th / total_mass;

  double x_next = x + spec.dt * xdot;
  double xdot_next = xdot + spec.dt * xddot;
  const double th_next = th + spec.dt * thdot;
  const double thdot_next = thdot + spec.dt * thddot;
  if (x_next < -kTrackLimit || x_next > kTrackLimit) {
    x_next = clip(x_next, -kTrackLimit, kTrackLimit);
    xdot_next = 0.0;
  }

  const double r = cos_th;

  EnvState next;
  next.t = state.t + 1;
  next.obs.resize(5);
  next.obs << x_next, xdot_next, std::cos(th_next), std::sin(th_next),
      thdot_next;
  return {next, r};
}

double cartpole_energy(const EnvSpec& spec, const EnvState& state) {
  const double xdot = state.obs[1];
  const double cos_th = state.obs[2];
  const double thdot = state.obs[4];
  const double mp = spec.cp_pole_mass;
  const double mc = spec.cart_mass;
  const double l = spec.cp_half_length;
  // uniform rod of half-length l: I about its center is (1/3) mp l^2
  const double kinetic = 0.5 * (mc + mp) * xdot * xdot +
                         mp * l * xdot * thdot * cos_th +
                         0.5 * (4.0 / 3.0) * mp * l * l * thdot * thdot;
  const double potential = mp * spec.gravity * l * cos_th;
  return kinetic + potential;
}

std::pair<EnvState, double> env_step(const EnvSpec& spec, const EnvState& state,
                                     const Eigen::VectorXd& action, Rng& rng) {
  if (action.size() != action_dim(spec.kind)) {
    throw std::invalid_argument("env_step: action dimension mismatch");
  }
  const double a = clip(action[0], -spec.action_bound, spec.action_bound);
  switch (spec.kind) {
    case EnvKind::kAr: {
      const auto [s_next, r] = ar_step(spec, state.obs[0], a, rng);
      EnvState next;
      next.t = state.t + 1;
      next.obs = Eigen::VectorXd::Constant(1, s_next);
      return {next, r};
    }
    case EnvKind::kArSparse: {
      const double s = state.obs[0];
      const double eps =
          spec.noise_sd > 0.0 ? rng.normal(0.0, spec.noise_sd) : 0.0;
      EnvState next;
      next.t = state.t + 1;
      next.obs = Eigen::VectorXd::Constant(1, spec.phi * s + a + eps);
      return {next, ar_sparse_reward(spec, s, a)};
    }
    case EnvKind::kPendulumWind:
      return pendulum_step(spec, state, a, rng);
    case EnvKind::kCartpoleGravity:
      return cartpole_step(spec, state, a, rng);
  }
  throw std::logic_error("env_step: unhandled kind");
}

SampledEnvs sample_env_group(EnvKind kind, const std::vector<GroupSpec>& groups,
                             std::uint64_t seed) {
  EnvSpec base;
  base.kind = kind;
  return sample_env_group(base, groups, seed);
}

SampledEnvs sample_env_group(const EnvSpec& base,
                             const std::vector<GroupSpec>& groups,
                             std::uint64_t seed) {
  Rng rng(seed);
  SampledEnvs out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const GroupSpec& group = groups[g];
    if (group.count < 1 || group.sd < 0.0) {
      throw std::invalid_argument("sample_env_group: invalid group spec");
    }
    for (int i = 0; i < group.count; ++i) {
      EnvSpec spec = base;
      const double value =
          group.sd > 0.0 ? rng.normal(group.mean, group.sd) : group.mean;
      if (group.param == "target") {
        spec.target = value;
      } else if (group.param == "wind") {
        spec.wind = value;
      } else if (group.param == "gravity") {
        spec.gravity = value;
      } else if (group.param == "phi") {
        spec.phi = value;
      } else if (group.param == "noise_sd") {
        spec.noise_sd = value;
      } else {
        throw std::invalid_argument("sample_env_group: unknown param " +
                                    group.param);
      }
      out.specs.push_back(with_defaults(spec));
      out.labels.push_back(static_cast<int>(g));
    }
  }
  return out;
}

}  // namespace cccrl
