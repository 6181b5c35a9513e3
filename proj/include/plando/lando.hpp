#pragma once

#include "plando/dictionary.hpp"
#include "plando/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace plando {

enum class Mode { Continuous, Discrete };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Snapshots of one parameter instance plus regression targets.
///
/// Continuous: Y has the shape of X and holds dx/dt at each snapshot.
/// Discrete:   Y = X[:, 1:], aligned with the first Nt-1 columns of X.
struct SnapshotSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd times;
  Mode mode = Mode::Discrete;
  Eigen::MatrixXd Y;

  /// Discrete set with next-step targets.
  static SnapshotSet discrete(Eigen::MatrixXd X, Eigen::VectorXd times);
  /// Continuous set with derivative targets from finite differences.
  static SnapshotSet continuous(Eigen::MatrixXd X, Eigen::VectorXd times);
  /// Continuous set with caller-supplied derivative targets.
  static SnapshotSet continuous(Eigen::MatrixXd X, Eigen::VectorXd times, Eigen::MatrixXd Y);

  Eigen::Index state_dim() const { return X.rows(); }
  Eigen::Index num_snapshots() const { return X.cols(); }
  double dt() const;
  /// Columns of X that are paired with the columns of Y.
  Eigen::MatrixXd inputs() const;

  /// Throws std::invalid_argument when a type invariant does not hold.
  void validate() const;
};

/// Second-order finite differences along the time axis (columns): central in
/// the interior, one-sided three-point stencils at both ends.
Eigen::MatrixXd derivative_targets(const Eigen::MatrixXd& X, double dt);

/// f(x) = W k(X~, x) over a sparse dictionary.
struct LandoModel {
  KernelSpec kernel;
  SparseDictionary dictionary;
  Eigen::MatrixXd weights;  // N x m
  Mode mode = Mode::Discrete;
  double fit_residual = 0.0;

  Eigen::Index state_dim() const { return dictionary.state_dim(); }
  Eigen::Index dictionary_size() const { return dictionary.size(); }
};

struct FitOptions {
  /// Relative singular value cutoff of the pseudoinverse, applied to
  /// L^{-1} k(X~, X) where L L^T is the dictionary Gram matrix.
  double rcond = 1e-10;
  /// Dictionary jitter; unset uses default_jitter().
  std::optional<double> jitter;
};

LandoModel fit(const SnapshotSet& snapshots, const KernelSpec& kernel, double nu, std::uint64_t seed,
               const FitOptions& options = {});

/// Relative Frobenius residual |Y - W k(X~, X)| / |Y| (0 when Y = 0).
double relative_fit_residual(const LandoModel& model, const SnapshotSet& snapshots);

Eigen::VectorXd predict_dynamics(const LandoModel& model, const Eigen::VectorXd& x);

struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // N x (steps + 1), first column is x0

  Eigen::VectorXd final_state() const { return states.col(states.cols() - 1); }
};

/// Classical fixed-step RK4 on dx/dt = f(x). The last step is shortened so
/// the trajectory ends exactly at t_end.
Trajectory integrate(const LandoModel& model, const Eigen::VectorXd& x0, double t_end, double step);

/// Iterates x_{j+1} = f(x_j). Times are j * dt.
Trajectory rollout(const LandoModel& model, const Eigen::VectorXd& x0, long steps, double dt = 1.0);

}  // namespace plando
