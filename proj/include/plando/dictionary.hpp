#pragma once

#include "plando/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace plando {

/// Sparse snapshot dictionary selected by the almost-linearly-dependent test.
///
/// `chol` is the lower Cholesky factor of k(columns, columns) + jitter * I and
/// is extended by one row every time a candidate is accepted.
struct SparseDictionary {
  KernelSpec kernel;
  Eigen::MatrixXd columns;  // N x m
  Eigen::MatrixXd chol;     // m x m, lower triangular
  double threshold = 0.0;
  double jitter = 0.0;
  std::uint64_t seed = 0;
  /// Column index in the training matrix of each dictionary column, in
  /// acceptance order. Empty when built from explicit columns.
  std::vector<Eigen::Index> source_indices;

  Eigen::Index size() const { return columns.cols(); }
  Eigen::Index state_dim() const { return columns.rows(); }

  /// Dictionary over the given columns, factored in one shot.
  static SparseDictionary from_columns(const KernelSpec& kernel, const Eigen::MatrixXd& columns,
                                       double jitter = 0.0);
};

struct AldResult {
  double delta;        // k(x,x) - k~^T pi, not clamped
  Eigen::VectorXd pi;  // (K~ + jitter I)^{-1} k~
};

/// Feature-space residual of x_c against the span of the dictionary.
AldResult ald_delta(const SparseDictionary& dict, const Eigen::VectorXd& x_c);

/// Default jitter: 1e-10 times the largest k(x, x) over the columns of X,
/// capped at nu / 100.
double default_jitter(const KernelSpec& kernel, const Eigen::MatrixXd& X, double nu);

/// Greedy ALD dictionary over the columns of X, visited in a seeded random
/// order. A candidate joins the dictionary iff its residual exceeds `nu`.
SparseDictionary build_dictionary(const KernelSpec& kernel, const Eigen::MatrixXd& X, double nu,
                                  std::uint64_t seed, std::optional<double> jitter = std::nullopt);

}  // namespace plando
