#pragma once

#include <Eigen/Dense>

namespace plando {

/// Orthonormal POD basis of a snapshot matrix (no mean subtraction).
struct PodBasis {
  Eigen::MatrixXd phi;              // N x n, orthonormal columns
  Eigen::VectorXd singular_values;  // all singular values of S, descending
  double energy_threshold = 1.0;    // 0 when the rank was fixed explicitly

  Eigen::Index rank() const { return phi.cols(); }
  Eigen::Index state_dim() const { return phi.rows(); }

  /// Cumulative energy fractions: entry i is sum_{j<=i} s_j^2 / sum s_j^2.
  Eigen::VectorXd cumulative_energy() const;
  /// Energy fraction captured by the retained basis.
  double captured_energy() const;
  /// sqrt(sum_{i>n} s_i^2), the Frobenius error of the rank-n approximation.
  double truncation_error() const;
};

/// Smallest rank whose cumulative energy reaches the threshold.
PodBasis compute_pod(const Eigen::MatrixXd& S, double energy_threshold = 0.9999);

/// Basis with exactly `rank` columns (clipped to the number available).
PodBasis compute_pod_rank(const Eigen::MatrixXd& S, Eigen::Index rank);

Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& x);
Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& xr);

/// Column-wise variants.
Eigen::MatrixXd project_columns(const PodBasis& basis, const Eigen::MatrixXd& X);
Eigen::MatrixXd reconstruct_columns(const PodBasis& basis, const Eigen::MatrixXd& Xr);

}  // namespace plando
