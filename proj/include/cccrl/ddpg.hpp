#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cccrl/envs.hpp"
#include "cccrl/nn.hpp"
#include "cccrl/optim.hpp"
#include "cccrl/rng.hpp"

namespace cccrl {

struct DdpgConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<Eigen::Index> actor_hidden = {256, 128};
  std::vector<Eigen::Index> critic_hidden = {256, 256, 128};
};

/// Actor maps states to tanh outputs scaled by action_bound; critic maps
/// concatenated state-action rows to a scalar value. Target copies of both
/// nets track the live nets through soft updates.
struct DdpgAgent {
  FeedForwardNet actor;
  FeedForwardNet critic;
  FeedForwardNet target_actor;
  FeedForwardNet target_critic;
  AdamState actor_opt;
  AdamState critic_opt;
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double action_bound = 1.0;
  int divergence_count = 0;
};

DdpgAgent make_ddpg_agent(int state_dim, int action_dim, double action_bound,
                          const DdpgConfig& config, Rng& rng);

/// Deterministic policy action: action_bound * actor(state).
Eigen::VectorXd actor_action(const DdpgAgent& agent,
                             const Eigen::VectorXd& state);

/// Mean squared error of critic([states, actions]) against fixed targets,
/// with its gradient over the critic parameters.
std::pair<double, Eigen::VectorXd> critic_loss_grad(
    const FeedForwardNet& critic, const Eigen::MatrixXd& states,
    const Eigen::MatrixXd& actions, const Eigen::VectorXd& targets);

/// Mean critic value of the actor's actions, with its gradient over the
/// actor parameters (the ascent direction for the policy update).
std::pair<double, Eigen::VectorXd> actor_objective_grad(
    const FeedForwardNet& actor, const FeedForwardNet& critic,
    const Eigen::MatrixXd& states, double action_bound);

void soft_update(const FeedForwardNet& live, FeedForwardNet& target,
                 double tau);

struct UpdateResult {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  bool skipped = false;
};

/// One DDPG step on a minibatch: critic regression toward
/// r + gamma * Q_target(s', actor_target(s')), actor ascent on Q(s, pi(s)),
/// then soft target updates. A non-finite loss or gradient skips the whole
/// update and bumps the divergence counter.
UpdateResult ddpg_update(DdpgAgent& agent, const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& actions,
                         const Eigen::VectorXd& rewards,
                         const Eigen::MatrixXd& next_states);

UpdateResult ddpg_update(DdpgAgent& agent,
                         const std::vector<TransitionTuple>& batch);

}  // namespace cccrl
