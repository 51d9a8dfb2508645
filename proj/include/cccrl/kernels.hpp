#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

namespace cccrl {

struct KernelParams {
  double lengthscale = 1.0;
  double variance = 1.0;
};

/// Squared Euclidean distances between the rows of a and the rows of b,
/// clamped at zero against roundoff.
template <typename DerivedA, typename DerivedB>
Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixBase<DerivedA>& a,
                                 const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("pairwise_sq_dist: column mismatch");
  }
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (a.derived() * b.derived().transpose());
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

/// RBF Gram matrix: entry (i,j) = variance * exp(-|a_i - b_j|^2 / (2 l^2)).
template <typename DerivedA, typename DerivedB>
Eigen::MatrixXd rbf_gram(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b,
                         const KernelParams& kp) {
  if (!(kp.lengthscale > 0.0) || !(kp.variance > 0.0)) {
    throw std::invalid_argument("rbf_gram: kernel params must be positive");
  }
  const double inv = -0.5 / (kp.lengthscale * kp.lengthscale);
  return kp.variance *
         (pairwise_sq_dist(a, b) * inv).array().exp().matrix();
}

/// H = I - (1/N) 1 1^T. Symmetric and idempotent; rows sum to zero.
inline Eigen::MatrixXd centering_matrix(Eigen::Index n) {
  if (n < 1) {
    throw std::invalid_argument("centering_matrix: N must be >= 1");
  }
  return Eigen::MatrixXd::Identity(n, n) -
         Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

/// Biased HSIC estimate (1/N^2) Tr(K H L H) for same-size square Grams.
template <typename DerivedK, typename DerivedL>
double hsic_biased(const Eigen::MatrixBase<DerivedK>& k,
                   const Eigen::MatrixBase<DerivedL>& l) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || l.rows() != n || l.cols() != n) {
    throw std::invalid_argument("hsic_biased: K and L must be same-size NxN");
  }
  // H L H computed by double-centering rather than explicit H products
  Eigen::MatrixXd lc = l.derived();
  const Eigen::VectorXd row_mean = lc.rowwise().mean();
  const Eigen::RowVectorXd col_mean = lc.colwise().mean();
  const double total_mean = lc.mean();
  lc.colwise() -= row_mean;
  lc.rowwise() -= col_mean;
  lc.array() += total_mean;
  // Tr(K (HLH)) = sum_ij K_ij (HLH)_ji
  const double tr = (k.derived().array() * lc.transpose().array()).sum();
  return tr / (static_cast<double>(n) * static_cast<double>(n));
}

/// Median of pairwise Euclidean row distances over distinct pairs; falls
/// back to 1.0 when every row is identical. Requires at least two rows.
template <typename Derived>
double median_heuristic(const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) {
    throw std::invalid_argument("median_heuristic: needs >= 2 rows");
  }
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back((x.row(i) - x.row(j)).norm());
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  const double median = (m % 2 == 1)
                            ? dists[m / 2]
                            : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  return median > 0.0 ? median : 1.0;
}

}  // namespace cccrl
