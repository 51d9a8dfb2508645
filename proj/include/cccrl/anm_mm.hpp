#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "cccrl/kernels.hpp"
#include "cccrl/nn.hpp"
#include "cccrl/optim.hpp"

namespace cccrl {

/// Thrown when a linear-algebra step cannot be stabilized (e.g. the jitter
/// ladder is exhausted while factorizing a Gram matrix).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-agent cause rows X and effect rows Y, both N x P.
struct CauseEffectDataset {
  Eigen::MatrixXd cause;
  Eigen::MatrixXd effect;

  Eigen::Index agents() const { return cause.rows(); }
  Eigen::Index samples() const { return cause.cols(); }
};

struct AnmMmConfig {
  Eigen::Index latent_dim = 1;  // Q
  double lambda = 1.0;          // weight of the log-HSIC independence term
  Eigen::Index encoder_hidden = 20;
  int max_iters = 500;
  int bandwidth_refresh = 50;  // optimizer iterations between HSIC
                               // bandwidth recomputations
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

/// GP hyperparameters: RBF kernel over [X, Theta] plus white-noise
/// precision beta (the noise variance on the Gram diagonal is 1/beta).
struct GpHyper {
  KernelParams kernel;
  double noise_precision = 100.0;
};

/// Encoder (back-constraint MLP mapping [X, Y] rows to latent rows) plus GP
/// hyperparameters and the frozen HSIC kernel bandwidths. The input
/// standardization is fixed at fit time so encode stays a pure function of
/// (params, input).
struct AnmMmModel {
  FeedForwardNet encoder;
  GpHyper gp_hyper;
  double lambda = 1.0;
  Eigen::RowVectorXd input_mean;
  Eigen::RowVectorXd input_scale;
  double hsic_x_bandwidth = 1.0;
  double hsic_theta_bandwidth = 1.0;
};

/// Latent model parameters, one row per agent (N x Q).
using ThetaMatrix = Eigen::MatrixXd;

ThetaMatrix encode(const AnmMmModel& model, const CauseEffectDataset& ds);

/// Negative marginal log likelihood of Y under a zero-mean GP over the rows
/// of x_tilde:
///   (D N / 2) ln 2pi + (D / 2) ln |K| + (1/2) Tr(K^-1 Y Y^T),
/// with K = rbf(x_tilde, x_tilde) + beta^-1 I and D = Y.cols(). Cholesky
/// failures walk a jitter ladder 1e-8..1e-4 before giving up.
double gp_neg_log_likelihood(const Eigen::MatrixXd& x_tilde,
                             const Eigen::MatrixXd& y, const GpHyper& hyper);

struct JointLoss {
  double loss = 0.0;
  Eigen::VectorXd grad;  // over [encoder params, log l, log var, log beta]
  double hsic = 0.0;
  bool hsic_clamped = false;
};

/// Full objective: GP negative log likelihood of the effect given
/// [cause, Theta] plus lambda * log HSIC(cause rows, Theta rows), evaluated
/// at the model's current parameters with its frozen HSIC bandwidths.
JointLoss joint_loss(const AnmMmModel& model, const CauseEffectDataset& ds);

/// Flat view of everything the optimizer moves: encoder weights followed by
/// log lengthscale, log variance, log noise precision.
Eigen::VectorXd anm_flatten(const AnmMmModel& model);
void anm_set_flat(AnmMmModel& model, const Eigen::VectorXd& flat);

/// LossClosure over the flat parameter vector for a fixed dataset and fixed
/// HSIC bandwidths; this is what fit() hands to the SCG optimizer.
LossClosure anm_loss_closure(const AnmMmModel& model_template,
                             const CauseEffectDataset& ds);

struct AnmMmFit {
  AnmMmModel model;
  ThetaMatrix theta;
  double initial_loss = 0.0;  // evaluated under the final bandwidths
  double final_loss = 0.0;
  int iterations = 0;
  int hsic_clamp_events = 0;
};

/// Optimizes encoder weights and GP hyperparameters jointly, recomputing the
/// latent-side HSIC bandwidth between optimizer rounds.
AnmMmFit fit(const CauseEffectDataset& ds, const AnmMmConfig& config);

}  // namespace cccrl
