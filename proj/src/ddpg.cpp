#include "cccrl/ddpg.hpp"

#include <cmath>
#include <stdexcept>

namespace cccrl {

namespace {

std::vector<Eigen::Index> layer_chain(int in,
                                      const std::vector<Eigen::Index>& hidden,
                                      int out) {
  std::vector<Eigen::Index> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

std::vector<Activation> relu_stack(std::size_t hidden, Activation last) {
  std::vector<Activation> acts(hidden, Activation::kRelu);
  acts.push_back(last);
  return acts;
}

Eigen::MatrixXd concat_cols(const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

DdpgAgent make_ddpg_agent(int state_dim, int action_dim, double action_bound,
                          const DdpgConfig& config, Rng& rng) {
  if (state_dim < 1 || action_dim < 1 || !(action_bound > 0.0)) {
    throw std::invalid_argument("make_ddpg_agent: bad dimensions or bound");
  }
  DdpgAgent agent;
  agent.actor = make_net(layer_chain(state_dim, config.actor_hidden, action_dim),
                         relu_stack(config.actor_hidden.size(), Activation::kTanh));
  agent.critic = make_net(
      layer_chain(state_dim + action_dim, config.critic_hidden, 1),
      relu_stack(config.critic_hidden.size(), Activation::kLinear));
  init_net_params(agent.actor, rng);
  init_net_params(agent.critic, rng);
  agent.target_actor = agent.actor;
  agent.target_critic = agent.critic;
  agent.actor_opt = make_adam_state(agent.actor.params.size());
  agent.critic_opt = make_adam_state(agent.critic.params.size());
  agent.gamma = config.gamma;
  agent.tau = config.tau;
  agent.actor_lr = config.actor_lr;
  agent.critic_lr = config.critic_lr;
  agent.action_bound = action_bound;
  return agent;
}

Eigen::VectorXd actor_action(const DdpgAgent& agent,
                             const Eigen::VectorXd& state) {
  const Eigen::MatrixXd out =
      net_forward(agent.actor, state.transpose());
  return agent.action_bound * out.row(0).transpose();
}

std::pair<double, Eigen::VectorXd> critic_loss_grad(
    const FeedForwardNet& critic, const Eigen::MatrixXd& states,
    const Eigen::MatrixXd& actions, const Eigen::VectorXd& targets) {
  const Eigen::Index b = states.rows();
  ForwardCache cache;
  const Eigen::MatrixXd q =
      net_forward(critic, concat_cols(states, actions), cache);
  const Eigen::VectorXd err = q.col(0) - targets;
  const double loss = err.squaredNorm() / static_cast<double>(b);
  const Eigen::MatrixXd dq = (2.0 / static_cast<double>(b)) * err;
  return {loss, net_backward(critic, cache, dq).param_grad};
}

std::pair<double, Eigen::VectorXd> actor_objective_grad(
    const FeedForwardNet& actor, const FeedForwardNet& critic,
    const Eigen::MatrixXd& states, double action_bound) {
  const Eigen::Index b = states.rows();
  const Eigen::Index action_dim = actor.layer_sizes.back();
  ForwardCache actor_cache;
  const Eigen::MatrixXd pi = net_forward(actor, states, actor_cache);
  ForwardCache critic_cache;
  const Eigen::MatrixXd q =
      net_forward(critic, concat_cols(states, action_bound * pi), critic_cache);
  const double objective = q.col(0).mean();
  const Eigen::MatrixXd dq =
      Eigen::MatrixXd::Constant(b, 1, 1.0 / static_cast<double>(b));
  const Eigen::MatrixXd dinput = net_backward_input(critic, critic_cache, dq);
  const Eigen::MatrixXd dpi =
      action_bound * dinput.rightCols(action_dim);
  return {objective, net_backward(actor, actor_cache, dpi).param_grad};
}

void soft_update(const FeedForwardNet& live, FeedForwardNet& target,
                 double tau) {
  target.params = tau * live.params + (1.0 - tau) * target.params;
}

UpdateResult ddpg_update(DdpgAgent& agent, const Eigen::MatrixXd& states,
                         const Eigen::MatrixXd& actions,
                         const Eigen::VectorXd& rewards,
                         const Eigen::MatrixXd& next_states) {
  if (states.rows() == 0) {
    throw std::invalid_argument("ddpg_update: empty batch");
  }
  UpdateResult res;

  const Eigen::MatrixXd next_pi =
      agent.action_bound * net_forward(agent.target_actor, next_states);
  const Eigen::MatrixXd next_q =
      net_forward(agent.target_critic, concat_cols(next_states, next_pi));
  const Eigen::VectorXd targets = rewards + agent.gamma * next_q.col(0);

  auto [closs, cgrad] = critic_loss_grad(agent.critic, states, actions, targets);
  if (!std::isfinite(closs) || !cgrad.allFinite()) {
    agent.divergence_count += 1;
    res.skipped = true;
    return res;
  }
  optimize_adaptive_step(agent.critic_opt, agent.critic.params, cgrad,
                         agent.critic_lr);

  auto [objective, again] = actor_objective_grad(agent.actor, agent.critic,
                                                 states, agent.action_bound);
  if (!std::isfinite(objective) || !again.allFinite()) {
    agent.divergence_count += 1;
    res.skipped = true;
    return res;
  }
  // ascend the objective
  optimize_adaptive_step(agent.actor_opt, agent.actor.params,
                         Eigen::VectorXd(-again), agent.actor_lr);

  soft_update(agent.actor, agent.target_actor, agent.tau);
  soft_update(agent.critic, agent.target_critic, agent.tau);

  res.critic_loss = closs;
  res.actor_objective = objective;
  return res;
}

UpdateResult ddpg_update(DdpgAgent& agent,
                         const std::vector<TransitionTuple>& batch) {
  if (batch.empty()) {
    throw std::invalid_argument("ddpg_update: empty batch");
  }
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index sd = batch.front().s.size();
  const Eigen::Index ad = batch.front().a.size();
  Eigen::MatrixXd states(b, sd), actions(b, ad), next_states(b, sd);
  Eigen::VectorXd rewards(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    states.row(i) = batch[i].s.transpose();
    actions.row(i) = batch[i].a.transpose();
    rewards[i] = batch[i].r;
    next_states.row(i) = batch[i].s_next.transpose();
  }
  return ddpg_update(agent, states, actions, rewards, next_states);
}

}  // namespace cccrl
