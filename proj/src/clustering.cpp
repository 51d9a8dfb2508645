#include "cccrl/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "cccrl/kernels.hpp"
#include "cccrl/rng.hpp"

namespace cccrl {

namespace {

constexpr double kVarianceFloor = 1e-6;
constexpr double kLogTwoPi = 1.8378770664093453;

// per-point, per-component log densities (N x C)
Eigen::MatrixXd log_densities(const GmmModel& model,
                              const Eigen::MatrixXd& theta) {
  const Eigen::Index n = theta.rows();
  const Eigen::Index c = model.means.rows();
  const Eigen::Index q = theta.cols();
  Eigen::MatrixXd out(n, c);
  for (Eigen::Index k = 0; k < c; ++k) {
    const Eigen::RowVectorXd mean = model.means.row(k);
    const Eigen::RowVectorXd var = model.covariances.row(k);
    const double log_norm =
        -0.5 * (q * kLogTwoPi + var.array().log().sum());
    const Eigen::MatrixXd centered = theta.rowwise() - mean;
    out.col(k) = -0.5 * (centered.array().square().matrix() *
                         var.cwiseInverse().transpose().asDiagonal())
                            .rowwise()
                            .sum();
    out.col(k).array() += log_norm + std::log(model.weights[k]);
  }
  return out;
}

// log-sum-exp across columns
Eigen::VectorXd row_lse(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd mx = m.rowwise().maxCoeff();
  return mx.array() +
         ((m.colwise() - mx).array().exp().rowwise().sum()).log();
}

Eigen::MatrixXd kmeanspp_centers(const Eigen::MatrixXd& theta, int c,
                                 Rng& rng) {
  const Eigen::Index n = theta.rows();
  Eigen::MatrixXd centers(c, theta.cols());
  centers.row(0) = theta.row(static_cast<Eigen::Index>(rng.below(n)));
  Eigen::VectorXd best_d2 =
      (theta.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < c; ++k) {
    const double total = best_d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform(0.0, total);
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= best_d2[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(n));
    }
    centers.row(k) = theta.row(pick);
    best_d2 = best_d2.cwiseMin(
        (theta.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

double gmm_log_likelihood(const GmmModel& model, const Eigen::MatrixXd& theta) {
  return row_lse(log_densities(model, theta)).sum();
}

Eigen::MatrixXd responsibilities(const GmmModel& model,
                                 const Eigen::MatrixXd& theta) {
  if (theta.cols() != model.means.cols()) {
    throw std::invalid_argument("responsibilities: latent dim mismatch");
  }
  const Eigen::MatrixXd ld = log_densities(model, theta);
  const Eigen::VectorXd lse = row_lse(ld);
  return (ld.colwise() - lse).array().exp().matrix();
}

std::vector<int> hard_assignments(const GmmModel& model,
                                  const Eigen::MatrixXd& theta) {
  const Eigen::MatrixXd r = responsibilities(model, theta);
  std::vector<int> labels(r.rows());
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    Eigen::Index arg = 0;
    r.row(i).maxCoeff(&arg);
    labels[i] = static_cast<int>(arg);
  }
  return labels;
}

GmmFit fit_gmm_em(const Eigen::MatrixXd& theta, int components,
                  std::uint64_t seed, int max_iters, double rel_tol) {
  const Eigen::Index n = theta.rows();
  const Eigen::Index q = theta.cols();
  if (components < 1 || n < components) {
    throw std::invalid_argument("fit_gmm_em: need N >= C >= 1");
  }
  Rng rng(seed);

  GmmFit fit;
  GmmModel& model = fit.model;
  model.weights = Eigen::VectorXd::Constant(components, 1.0 / components);
  model.means = kmeanspp_centers(theta, components, rng);
  const Eigen::RowVectorXd global_var =
      (theta.rowwise() - theta.colwise().mean())
          .array()
          .square()
          .colwise()
          .mean()
          .cwiseMax(kVarianceFloor);
  model.covariances = global_var.replicate(components, 1);

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::MatrixXd resp = responsibilities(model, theta);
    const Eigen::VectorXd mass = resp.colwise().sum();

    bool reseeded = false;
    for (int k = 0; k < components; ++k) {
      if (mass[k] < 1e-8) {
        model.means.row(k) = theta.row(static_cast<Eigen::Index>(rng.below(n)));
        model.covariances.row(k) = global_var;
        model.weights[k] = 1.0 / static_cast<double>(n);
        reseeded = true;
      }
    }
    if (reseeded) {
      model.weights /= model.weights.sum();
      fit.reseed_events += 1;
      prev_ll = -std::numeric_limits<double>::infinity();
      continue;
    }

    // M step
    model.weights = mass / static_cast<double>(n);
    model.means = mass.cwiseInverse().asDiagonal() * (resp.transpose() * theta);
    for (int k = 0; k < components; ++k) {
      const Eigen::MatrixXd centered = theta.rowwise() - model.means.row(k);
      const Eigen::RowVectorXd var =
          (resp.col(k).asDiagonal() * centered.array().square().matrix())
              .colwise()
              .sum() /
          mass[k];
      model.covariances.row(k) = var.cwiseMax(kVarianceFloor);
    }
    (void)q;

    const double ll = gmm_log_likelihood(model, theta);
    fit.log_likelihoods.push_back(ll);
    if (std::isfinite(prev_ll) &&
        ll - prev_ll < rel_tol * (std::abs(prev_ll) + 1.0)) {
      break;
    }
    prev_ll = ll;
  }
  return fit;
}

GmmFit fit_gmm_bic(const Eigen::MatrixXd& theta, int max_components,
                   std::uint64_t seed) {
  const double n = static_cast<double>(theta.rows());
  const double q = static_cast<double>(theta.cols());
  GmmFit best;
  double best_bic = std::numeric_limits<double>::infinity();
  const int cap = std::min<int>(max_components, static_cast<int>(theta.rows()));
  for (int c = 1; c <= cap; ++c) {
    GmmFit fit = fit_gmm_em(theta, c, seed);
    const double ll = gmm_log_likelihood(fit.model, theta);
    const double params = (c - 1) + 2.0 * c * q;
    const double bic = -2.0 * ll + params * std::log(n);
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(fit);
    }
  }
  return best;
}

Eigen::MatrixXd similarity(const Eigen::MatrixXd& v) {
  return (pairwise_sq_dist(v, v) * -0.5).array().exp().matrix();
}

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& k) {
  return k.rowwise().sum().cwiseInverse().asDiagonal() * k;
}

Eigen::VectorXi allocate_batch(const Eigen::VectorXd& k_hat_row, int batch) {
  const Eigen::Index n = k_hat_row.size();
  if (batch < 1) {
    throw std::invalid_argument("allocate_batch: batch must be >= 1");
  }
  Eigen::VectorXd quota = static_cast<double>(batch) * k_hat_row;
  Eigen::VectorXi alloc(n);
  std::vector<std::pair<double, Eigen::Index>> fractional(n);
  int assigned = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = std::floor(quota[i]);
    alloc[i] = static_cast<int>(f);
    assigned += alloc[i];
    fractional[i] = {quota[i] - f, i};
  }
  int leftover = batch - assigned;
  std::stable_sort(fractional.begin(), fractional.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (Eigen::Index i = 0; leftover > 0 && i < n; ++i, --leftover) {
    alloc[fractional[i].second] += 1;
  }
  return alloc;
}

SimilarityAllocation build_allocation(const Eigen::MatrixXd& v, int batch) {
  SimilarityAllocation sa;
  sa.batch = batch;
  sa.k = similarity(v);
  sa.k_hat = row_normalize(sa.k);
  sa.k_bar.resize(v.rows(), v.rows());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    sa.k_bar.row(i) = allocate_batch(sa.k_hat.row(i), batch).transpose();
  }
  return sa;
}

}  // namespace cccrl
