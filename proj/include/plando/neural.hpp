#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace plando {

enum class ActivationKind { Snake, Relu, Tanh };

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

/// snake_a(x) = x + sin^2(a x) / a
double snake(double a, double x);
/// d/dx snake_a(x) = 1 + sin(2 a x)
double snake_derivative(double a, double x);

struct MlpConfig {
  Eigen::Index input_dim = 1;
  Eigen::Index output_dim = 1;
  std::vector<Eigen::Index> hidden_layers;
  ActivationKind activation = ActivationKind::Snake;
  double snake_a = 1.0;
  /// Learn one snake frequency per hidden layer instead of keeping snake_a.
  bool snake_trainable = false;

  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 5000;
  int patience = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;

  /// Three hidden layers of 32 with snake activation.
  static MlpConfig lv_preset(Eigen::Index input_dim, Eigen::Index output_dim);
  /// Four hidden layers of 110 with snake activation.
  static MlpConfig pde_preset(Eigen::Index input_dim, Eigen::Index output_dim);
  static MlpConfig preset(const std::string& name, Eigen::Index input_dim, Eigen::Index output_dim);
};

/// y = (x - shift) / scale, applied per dimension.
struct AffineScaler {
  Eigen::VectorXd shift;
  Eigen::VectorXd scale;

  static AffineScaler identity(Eigen::Index dim);
  /// Maps the per-row [min, max] of `data` onto [-1, 1].
  static AffineScaler min_max(const Eigen::MatrixXd& data);
  /// Per-row zero mean, unit (population) standard deviation.
  static AffineScaler standardize(const Eigen::MatrixXd& data);

  Eigen::Index dim() const { return shift.size(); }
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& y) const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  double snake_a = 1.0;    // unused on the output layer
};

struct EpochRecord {
  double train_loss;
  double valid_loss;
};

/// Network in scaled coordinates plus the scalers around it.
struct NeuralMap {
  MlpConfig config;
  std::vector<DenseLayer> layers;
  AffineScaler input_scaler;
  AffineScaler output_scaler;
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_valid_loss = 0.0;
  double t_star = 0.0;

  /// Full map mu -> y in physical units.
  Eigen::VectorXd forward(const Eigen::VectorXd& mu) const;
  /// Column-wise forward for a batch of parameters (input_dim x B).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& mus) const;
};

/// Xavier-uniform weights, zero biases, identity scalers.
NeuralMap init_network(const MlpConfig& config);

/// Network output in scaled coordinates for scaled inputs (columns are samples).
Eigen::MatrixXd network_output(const std::vector<DenseLayer>& layers, ActivationKind activation,
                               const Eigen::MatrixXd& inputs);

/// Mean over samples of the squared output error, and its gradient with
/// respect to every layer parameter when `grad` is non-null. `grad` layers
/// mirror `layers`; snake_a entries carry d loss / d a.
double loss_and_gradient(const std::vector<DenseLayer>& layers, ActivationKind activation,
                         const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         std::vector<DenseLayer>* grad);

/// Mini-batch Adam on the mean squared error in scaled coordinates, keeping
/// the parameters of the epoch with the lowest validation loss. Inputs are
/// (input_dim x n), targets (output_dim x n). With an empty validation set
/// the training loss drives early stopping.
NeuralMap train(const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& train_targets,
                const Eigen::MatrixXd& valid_inputs, const Eigen::MatrixXd& valid_targets,
                const MlpConfig& config, double t_star = 0.0);

}  // namespace plando
