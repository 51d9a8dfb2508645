#include "cccrl/optim.hpp"

#include <cmath>
#include <limits>

namespace cccrl {

namespace {
constexpr double kSigmaProbe = 1e-5;
constexpr double kLambdaInit = 1e-6;
constexpr double kLambdaMax = 1e20;
}  // namespace

ScgResult optimize_scg(const LossClosure& loss, const Eigen::VectorXd& init,
                       int max_iters, double tol) {
  const Eigen::Index dim = init.size();
  Eigen::VectorXd w = init;
  Eigen::VectorXd g(dim);
  double f = loss(w, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    throw std::invalid_argument("scg: objective not finite at init");
  }

  ScgResult best{w, f, g.norm(), 0, false};
  Eigen::VectorXd r = -g;
  Eigen::VectorXd p = r;
  double lambda = kLambdaInit;
  double lambda_bar = 0.0;
  double delta_raw = 0.0;
  bool need_probe = true;
  Eigen::VectorXd probe_grad(dim), trial_grad(dim);

  for (int k = 1; k <= max_iters; ++k) {
    const double rnorm = r.norm();
    if (rnorm < tol) {
      best.converged = true;
      break;
    }
    double p2 = p.squaredNorm();
    double mu = p.dot(r);
    if (mu <= 0.0 || p2 == 0.0) {
      p = r;
      p2 = p.squaredNorm();
      mu = rnorm * rnorm;
      need_probe = true;
    }

    if (need_probe) {
      const double sigma = kSigmaProbe / std::sqrt(p2);
      const double fp = loss(w + sigma * p, probe_grad);
      if (!std::isfinite(fp) || !probe_grad.allFinite()) {
        throw OptimizationDiverged("scg: non-finite loss at probe point",
                                   best.params);
      }
      delta_raw = p.dot(probe_grad - g) / sigma;
      need_probe = false;
    }

    // Levenberg-Marquardt scaling of the curvature estimate
    double delta = delta_raw + (lambda - lambda_bar) * p2;
    if (delta <= 0.0) {
      lambda_bar = 2.0 * (lambda - delta / p2);
      delta = -delta + lambda * p2;
      lambda = lambda_bar;
    }
    const double alpha = mu / delta;

    const double f_new = loss(w + alpha * p, trial_grad);
    const bool finite_trial = std::isfinite(f_new) && trial_grad.allFinite();
    const double comparison =
        finite_trial ? 2.0 * delta * (f - f_new) / (mu * mu)
                     : -std::numeric_limits<double>::infinity();

    if (comparison >= 0.0) {
      w += alpha * p;
      f = f_new;
      g = trial_grad;
      const Eigen::VectorXd r_new = -g;
      lambda_bar = 0.0;
      if (k % static_cast<int>(dim) == 0) {
        p = r_new;
      } else {
        const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
        p = r_new + beta * p;
      }
      r = r_new;
      need_probe = true;
      if (f < best.loss) {
        best.params = w;
        best.loss = f;
        best.grad_norm = r.norm();
      }
      if (comparison >= 0.75) {
        lambda = std::max(lambda * 0.25, 1e-18);
      }
    } else {
      lambda_bar = lambda;
    }
    if (comparison < 0.25) {
      const double dk = finite_trial ? comparison : -1.0;
      lambda += delta * (1.0 - dk) / p2;
      if (!std::isfinite(lambda)) lambda = kLambdaMax;
    }
    if (lambda >= kLambdaMax) {
      break;  // trust region exhausted; return best point found
    }
    best.iterations = k;
  }
  best.grad_norm = r.norm();
  if (best.grad_norm < tol) best.converged = true;
  return best;
}

AdamState make_adam_state(Eigen::Index dim) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(dim);
  s.v = Eigen::VectorXd::Zero(dim);
  return s;
}

void optimize_adaptive_step(AdamState& state, Eigen::VectorXd& params,
                            const Eigen::VectorXd& grad, double lr) {
  if (grad.size() != params.size()) {
    throw std::invalid_argument("adam: gradient length mismatch");
  }
  if (!grad.allFinite()) {
    throw std::invalid_argument("adam: non-finite gradient");
  }
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v =
      state.beta2 * state.v.array().matrix() +
      (1.0 - state.beta2) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  params.array() -= lr * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + state.epsilon);
}

}  // namespace cccrl
