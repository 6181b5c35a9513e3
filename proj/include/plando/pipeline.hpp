#pragma once

#include "plando/lando.hpp"
#include "plando/neural.hpp"
#include "plando/pod.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace plando {

using Bounds = std::vector<std::pair<double, double>>;

/// One parameter instance with its snapshots.
struct ParameterInstance {
  Eigen::VectorXd mu;
  SnapshotSet snapshots;
};

struct BundleEntry {
  Eigen::VectorXd mu;
  LandoModel model;
};

/// Offline stage output: one fitted surrogate per parameter instance.
///
/// `valid_models` are fitted the same way on the validation instances so the
/// online stage can produce validation targets through the surrogate path.
struct OfflineBundle {
  std::vector<BundleEntry> models;
  std::vector<BundleEntry> valid_models;
  KernelSpec kernel;
  double nu = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Discrete;
  double dt = 0.0;             // snapshot spacing of the training data
  double train_t_end = 0.0;    // end of the training time window
  Eigen::VectorXd initial_state;
  Bounds bounds;               // parameter box of the training instances
  std::string system;

  Eigen::Index state_dim() const;
  Eigen::Index param_dim() const;
  std::vector<double> fit_residuals() const;
  std::vector<Eigen::Index> dictionary_sizes() const;
};

OfflineBundle offline(const std::vector<ParameterInstance>& train, const KernelSpec& kernel, double nu,
                      std::uint64_t seed, const std::vector<ParameterInstance>& valid = {},
                      const FitOptions& fit_options = {});

/// State at t_star of every model, started from x0 (N x models.size()).
/// Continuous models are integrated with `step` (defaults to the training
/// spacing); discrete models are rolled out round(t_star / dt) steps.
Eigen::MatrixXd generate_at(const std::vector<BundleEntry>& models, Mode mode, double dt, double t_star,
                            const Eigen::VectorXd& x0, std::optional<double> step = std::nullopt);
Eigen::MatrixXd generate_at(const OfflineBundle& bundle, double t_star, const Eigen::VectorXd& x0,
                            std::optional<double> step = std::nullopt);

struct PodConfig {
  double energy_threshold = 0.9999;
  std::optional<Eigen::Index> fixed_rank;
};

struct OnlineOptions {
  std::optional<PodConfig> pod;
  /// Architecture and optimizer settings; input/output dims are filled in.
  MlpConfig mlp;
  std::optional<double> step;
};

/// Online stage model for a single time instant.
struct OnlineModel {
  double t_star = 0.0;
  std::optional<PodBasis> pod;
  NeuralMap map;
  double step = 0.0;
  Eigen::VectorXd x0;
  bool extrapolated = false;
  Bounds bounds;
  Eigen::Index state_dim = 0;
  // Per-stage residuals
  double mean_fit_residual = 0.0;
  double max_fit_residual = 0.0;
  double pod_projection_error = 0.0;  // relative Frobenius error on the generated training states

  Eigen::Index output_dim() const { return pod ? pod->rank() : state_dim; }
};

OnlineModel online(const OfflineBundle& bundle, double t_star, const Eigen::VectorXd& x0,
                   const OnlineOptions& options);

/// Set when predict() is queried outside the training parameter box.
struct Prediction {
  Eigen::VectorXd state;
  bool extrapolated_parameter = false;
};

Prediction predict_checked(const OnlineModel& model, const Eigen::VectorXd& mu);
Eigen::VectorXd predict(const OnlineModel& model, const Eigen::VectorXd& mu);

/// |x - x_hat| / |x|
double relative_l2_error(const Eigen::VectorXd& reference, const Eigen::VectorXd& prediction);

/// Population mean and standard deviation (divide by n).
std::pair<double, double> mean_and_std(const Eigen::VectorXd& errors);

struct ErrorReport {
  double t_star = 0.0;
  Eigen::VectorXd errors;
  double mean = 0.0;
  double std_dev = 0.0;
  Eigen::Index count = 0;
  bool extrapolated = false;
  double mean_fit_residual = 0.0;
  double pod_projection_error = 0.0;
  double dnn_valid_loss = 0.0;
  Eigen::Index pod_rank = 0;
};

/// Relative errors against reference states (columns) at the model's t_star.
ErrorReport evaluate(const OnlineModel& model, const Eigen::MatrixXd& test_mus,
                     const Eigen::MatrixXd& references);

/// Repeats online + evaluate for several time instants. `references(t)`
/// returns the reference states of the test instances at t.
template <typename ReferenceFn>
std::vector<ErrorReport> sweep(const OfflineBundle& bundle, const std::vector<double>& t_stars,
                               const Eigen::VectorXd& x0, const OnlineOptions& options,
                               const Eigen::MatrixXd& test_mus, ReferenceFn&& references) {
  std::vector<ErrorReport> out;
  out.reserve(t_stars.size());
  for (double t : t_stars) {
    const OnlineModel model = online(bundle, t, x0, options);
    out.push_back(evaluate(model, test_mus, references(t)));
  }
  return out;
}

}  // namespace plando
