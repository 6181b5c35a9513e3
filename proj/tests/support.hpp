#pragma once

// Hand-rolled generators and dense oracles shared by the unit tests.

#include "plando/random.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace testing {

inline Eigen::MatrixXd random_matrix(plando::Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                                     double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = plando::uniform(rng, lo, hi);
  return m;
}

inline Eigen::VectorXd random_vector(plando::Rng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  return random_matrix(rng, n, 1, lo, hi).col(0);
}

inline Eigen::Index random_int(plando::Rng& rng, Eigen::Index lo, Eigen::Index hi) {
  return lo + static_cast<Eigen::Index>(plando::uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

/// Random symmetric matrix with spectral radius `radius` (< 1 gives a stable
/// map). Eigenvalues are drawn one per stratum of [-radius, radius] so they
/// stay at least radius / n apart and a single trajectory excites all modes.
inline Eigen::MatrixXd random_stable_matrix(plando::Rng& rng, Eigen::Index n, double radius = 0.95) {
  const Eigen::MatrixXd Q = random_matrix(rng, n, n).householderQr().householderQ();
  Eigen::VectorXd d(n);
  const double width = 2.0 * radius / static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) d(k) = -radius + width * (static_cast<double>(k) + 0.25 + 0.5 * plando::uniform01(rng));
  d(n - 1) = radius;  // pin the spectral radius so long rollouts stay informative
  return Q * d.asDiagonal() * Q.transpose();
}

/// Columns x0, A x0, A^2 x0, ... (count columns).
inline Eigen::MatrixXd power_trajectory(const Eigen::MatrixXd& A, const Eigen::VectorXd& x0, Eigen::Index count) {
  Eigen::MatrixXd X(x0.size(), count);
  X.col(0) = x0;
  for (Eigen::Index k = 1; k < count; ++k) X.col(k) = A * X.col(k - 1);
  return X;
}

/// Dense oracle for the ALD residual: solve (K~ + jitter I) pi = k~ with a
/// full-pivoting LU, independent of the incremental Cholesky.
inline double dense_ald_delta(const Eigen::MatrixXd& Kdict, const Eigen::VectorXd& kvec, double kcc, double jitter) {
  const Eigen::MatrixXd A = Kdict + jitter * Eigen::MatrixXd::Identity(Kdict.rows(), Kdict.cols());
  const Eigen::VectorXd pi = A.fullPivLu().solve(kvec);
  return kcc - kvec.dot(pi);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
