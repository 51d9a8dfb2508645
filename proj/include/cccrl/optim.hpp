#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace cccrl {

/// Differentiable objective: fills `grad` (resized by the callee) and
/// returns the loss at `params`.
using LossClosure =
    std::function<double(const Eigen::VectorXd& params, Eigen::VectorXd& grad)>;

/// Thrown when an optimizer cannot recover from non-finite objective values.
/// Carries the best parameters seen before the failure.
class OptimizationDiverged : public std::runtime_error {
 public:
  OptimizationDiverged(std::string what, Eigen::VectorXd last_good)
      : std::runtime_error(std::move(what)),
        last_good_params(std::move(last_good)) {}

  Eigen::VectorXd last_good_params;
};

struct ScgResult {
  Eigen::VectorXd params;
  double loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;  // gradient norm fell below tol
};

/// Scaled conjugate gradient: sigma-probe second-order estimates with
/// Levenberg-Marquardt style lambda adjustment, conjugate direction restart
/// every dim(params) iterations. Trial points with non-finite loss are
/// treated as failed steps; the run aborts with OptimizationDiverged only
/// when lambda saturates without any recovery.
ScgResult optimize_scg(const LossClosure& loss, const Eigen::VectorXd& init,
                       int max_iters, double tol);

/// First/second moment exponential averages with bias correction.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(Eigen::Index dim);

/// One in-place descent step. Rejects non-finite gradients.
void optimize_adaptive_step(AdamState& state, Eigen::VectorXd& params,
                            const Eigen::VectorXd& grad, double lr);

}  // namespace cccrl
