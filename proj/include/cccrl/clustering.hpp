#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cccrl {

/// Diagonal-covariance Gaussian mixture over latent rows.
struct GmmModel {
  Eigen::VectorXd weights;      // C, simplex
  Eigen::MatrixXd means;        // C x Q
  Eigen::MatrixXd covariances;  // C x Q, diagonal entries, floored
};

struct GmmFit {
  GmmModel model;
  std::vector<double> log_likelihoods;  // one entry per EM iteration
  int reseed_events = 0;
};

/// EM with k-means++ style seeding. Components that lose all responsibility
/// mass are re-seeded at a random data point.
GmmFit fit_gmm_em(const Eigen::MatrixXd& theta, int components,
                  std::uint64_t seed, int max_iters = 500,
                  double rel_tol = 1e-8);

/// Mean data log likelihood sum under the model.
double gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& theta);

/// Posterior component probabilities, one simplex row per data point (N x C).
Eigen::MatrixXd responsibilities(const GmmModel& model,
                                 const Eigen::MatrixXd& theta);

/// argmax responsibilities per row.
std::vector<int> hard_assignments(const GmmModel& model,
                                  const Eigen::MatrixXd& theta);

/// Fits C = 1..max_components and keeps the lowest BIC.
GmmFit fit_gmm_bic(const Eigen::MatrixXd& theta, int max_components,
                   std::uint64_t seed);

/// Pairwise responsibility-vector similarity exp(-|v_m - v_n|^2 / 2);
/// symmetric with unit diagonal.
Eigen::MatrixXd similarity(const Eigen::MatrixXd& v);

/// Rescales each row to sum to one.
Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& k);

/// Integer apportionment of B slots proportional to a simplex row, by
/// largest remainder: floor everything, then hand the leftover slots to the
/// largest fractional parts (ties to the lower index). The result always
/// sums to exactly B and each entry is within one of B * row[q].
Eigen::VectorXi allocate_batch(const Eigen::VectorXd& k_hat_row, int batch);

/// Similarity pipeline output: raw kernel, row-normalized kernel, and
/// per-agent integer batch quotas.
struct SimilarityAllocation {
  Eigen::MatrixXd k;
  Eigen::MatrixXd k_hat;
  Eigen::MatrixXi k_bar;
  int batch = 0;
};

SimilarityAllocation build_allocation(const Eigen::MatrixXd& v, int batch);

}  // namespace cccrl
