#pragma once

#include "plando/pipeline.hpp"
#include "plando/systems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plando {

/// Benchmark setup: parameter box, split sizes, training window and solver
/// settings. Parameters per system:
///   lv          mu = (alpha)          beta from `lv`
///   lv2         mu = (alpha, beta)
///   heat        mu = (D)
///   allen-cahn  mu = (lambda, epsilon)
struct ScenarioConfig {
  std::string system = "lv";
  Bounds bounds;
  Eigen::Index n_train = 1;
  Eigen::Index n_valid = 1;
  Eigen::Index n_test = 1;
  std::uint64_t seed = 0;

  /// Initial state of the training trajectories (LV only; PDEs use their
  /// analytic initial condition).
  Eigen::VectorXd x0;
  double t_end = 1.0;
  Eigen::Index n_snapshots = 2;  // training grid points on [0, t_end]
  /// Times at which reference test states are stored.
  std::vector<double> test_times;
  /// Initial state of the test trajectories when it differs from training.
  std::optional<Eigen::VectorXd> test_x0;

  LotkaVolterraParams lv;
  OdeTolerances ode_tolerances;
  HeatParams heat;
  AllenCahnParams allen_cahn;

  static ScenarioConfig defaults(const std::string& system);

  Eigen::Index param_dim() const { return static_cast<Eigen::Index>(bounds.size()); }
  Eigen::Index state_dim() const;
  Mode mode() const;
  Eigen::VectorXd train_grid() const;
  /// Initial state used when none is given: x0 for LV, the analytic initial
  /// condition for the PDEs.
  Eigen::VectorXd default_initial_state() const;
  void validate() const;
};

bool is_known_system(const std::string& system);

LotkaVolterraParams lotka_volterra_params(const ScenarioConfig& config, const Eigen::VectorXd& mu);
HeatParams heat_params(const ScenarioConfig& config, const Eigen::VectorXd& mu);
AllenCahnParams allen_cahn_params(const ScenarioConfig& config, const Eigen::VectorXd& mu);

/// Reference solver states (N x times.size()) for parameter mu, started from
/// `initial` at t = 0 (default_initial_state() when unset). Times ascending.
Eigen::MatrixXd reference_states(const ScenarioConfig& config, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& times,
                                 const std::optional<Eigen::VectorXd>& initial = std::nullopt);

/// Reference states of every column of `mus` at a single time (N x mus.cols()).
Eigen::MatrixXd reference_at(const ScenarioConfig& config, const Eigen::MatrixXd& mus, double t,
                             const std::optional<Eigen::VectorXd>& initial = std::nullopt);

/// Snapshot set for fitting. LV gives continuous sets whose targets are the
/// exact right-hand side or finite differences; the PDEs give discrete sets.
SnapshotSet training_snapshots(const ScenarioConfig& config, const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& states, const Eigen::VectorXd& times,
                               DerivativeSource targets = DerivativeSource::FiniteDifference);

/// Trajectories of one split: states[i] is N x times.size() for mus.col(i).
struct Split {
  Eigen::MatrixXd mus;
  Eigen::VectorXd times;
  std::vector<Eigen::MatrixXd> states;

  Eigen::Index size() const { return mus.cols(); }
  /// States of every instance at time t (must be one of `times`).
  Eigen::MatrixXd states_at(double t) const;
};

struct Dataset {
  ScenarioConfig config;
  Split train;
  Split valid;
  Split test;
};

/// Latin hypercube parameters plus reference trajectories for all splits:
/// train and valid on the training grid, test at config.test_times.
Dataset generate_dataset(const ScenarioConfig& config);

std::vector<ParameterInstance> to_instances(const ScenarioConfig& config, const Split& split,
                                            DerivativeSource targets = DerivativeSource::FiniteDifference);

}  // namespace plando
