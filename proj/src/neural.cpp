#include "plando/neural.hpp"

#include "plando/errors.hpp"
#include "plando/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace plando {

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Snake: return "snake";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Tanh: return "tanh";
  }
  return "unknown";
}

ActivationKind activation_from_string(const std::string& name) {
  if (name == "snake") return ActivationKind::Snake;
  if (name == "relu") return ActivationKind::Relu;
  if (name == "tanh") return ActivationKind::Tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

double snake(double a, double x) {
  const double s = std::sin(a * x);
  return x + s * s / a;
}

double snake_derivative(double a, double x) { return 1.0 + std::sin(2.0 * a * x); }

// ---------------------------------------------------------------------------
// Config

void MlpConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("MLP input/output dimensions must be >= 1");
  for (auto w : hidden_layers)
    if (w < 1) throw std::invalid_argument("MLP hidden layer widths must be >= 1");
  if (activation == ActivationKind::Snake && !(snake_a > 0.0))
    throw std::invalid_argument("snake frequency must be > 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
    throw std::invalid_argument("invalid Adam hyperparameters");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) throw std::invalid_argument("patience must lie in [1, max_epochs]");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
}

MlpConfig MlpConfig::lv_preset(Eigen::Index input_dim, Eigen::Index output_dim) {
  MlpConfig c;
  c.input_dim = input_dim;
  c.output_dim = output_dim;
  c.hidden_layers = {32, 32, 32};
  c.activation = ActivationKind::Snake;
  return c;
}

MlpConfig MlpConfig::pde_preset(Eigen::Index input_dim, Eigen::Index output_dim) {
  MlpConfig c;
  c.input_dim = input_dim;
  c.output_dim = output_dim;
  c.hidden_layers = {110, 110, 110, 110};
  c.activation = ActivationKind::Snake;
  return c;
}

MlpConfig MlpConfig::preset(const std::string& name, Eigen::Index input_dim, Eigen::Index output_dim) {
  if (name == "lv") return lv_preset(input_dim, output_dim);
  if (name == "pde") return pde_preset(input_dim, output_dim);
  throw std::invalid_argument("unknown MLP preset '" + name + "' (expected lv or pde)");
}

// ---------------------------------------------------------------------------
// Scalers

AffineScaler AffineScaler::identity(Eigen::Index dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

AffineScaler AffineScaler::min_max(const Eigen::MatrixXd& data) {
  if (data.cols() < 1) throw std::invalid_argument("min_max scaler needs at least one sample");
  const Eigen::VectorXd lo = data.rowwise().minCoeff();
  const Eigen::VectorXd hi = data.rowwise().maxCoeff();
  AffineScaler s;
  s.shift = 0.5 * (lo + hi);
  s.scale = 0.5 * (hi - lo);
  for (Eigen::Index i = 0; i < s.scale.size(); ++i)
    if (!(s.scale(i) > 0.0)) s.scale(i) = 1.0;
  return s;
}

AffineScaler AffineScaler::standardize(const Eigen::MatrixXd& data) {
  if (data.cols() < 1) throw std::invalid_argument("standardizing scaler needs at least one sample");
  AffineScaler s;
  s.shift = data.rowwise().mean();
  s.scale = ((data.colwise() - s.shift).array().square().rowwise().sum() /
             static_cast<double>(data.cols()))
                .sqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i)
    if (!(s.scale(i) > 0.0)) s.scale(i) = 1.0;
  return s;
}

Eigen::MatrixXd AffineScaler::transform(const Eigen::MatrixXd& x) const {
  if (x.rows() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
  return (x.colwise() - shift).array().colwise() / scale.array();
}

Eigen::MatrixXd AffineScaler::inverse(const Eigen::MatrixXd& y) const {
  if (y.rows() != dim()) throw std::invalid_argument("scaler: dimension mismatch");
  return (y.array().colwise() * scale.array()).matrix().colwise() + shift;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

Eigen::MatrixXd activate(ActivationKind kind, double a, const Eigen::MatrixXd& z) {
  switch (kind) {
    case ActivationKind::Snake: return z.unaryExpr([a](double x) { return snake(a, x); });
    case ActivationKind::Relu: return z.cwiseMax(0.0);
    case ActivationKind::Tanh: return z.array().tanh().matrix();
  }
  return z;
}

Eigen::MatrixXd activate_derivative(ActivationKind kind, double a, const Eigen::MatrixXd& z) {
  switch (kind) {
    case ActivationKind::Snake: return z.unaryExpr([a](double x) { return snake_derivative(a, x); });
    case ActivationKind::Relu: return z.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
    case ActivationKind::Tanh: return (1.0 - z.array().tanh().square()).matrix();
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

// d/da [x + sin^2(a x) / a]
double snake_frequency_derivative(double a, double x) {
  const double s = std::sin(a * x);
  return x * std::sin(2.0 * a * x) / a - s * s / (a * a);
}

}  // namespace

Eigen::MatrixXd network_output(const std::vector<DenseLayer>& layers, ActivationKind activation,
                               const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd z = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd pre = layers[l].weight * z;
    pre.colwise() += layers[l].bias;
    z = l + 1 < layers.size() ? activate(activation, layers[l].snake_a, pre) : std::move(pre);
  }
  return z;
}

double loss_and_gradient(const std::vector<DenseLayer>& layers, ActivationKind activation,
                         const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         std::vector<DenseLayer>* grad) {
  const std::size_t n_layers = layers.size();
  const double batch = static_cast<double>(inputs.cols());
  std::vector<Eigen::MatrixXd> pre(n_layers);
  std::vector<Eigen::MatrixXd> post(n_layers + 1);
  post[0] = inputs;
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre[l] = layers[l].weight * post[l];
    pre[l].colwise() += layers[l].bias;
    post[l + 1] = l + 1 < n_layers ? activate(activation, layers[l].snake_a, pre[l]) : pre[l];
  }
  const Eigen::MatrixXd diff = post[n_layers] - targets;
  const double loss = diff.squaredNorm() / batch;
  if (grad == nullptr) return loss;

  grad->resize(n_layers);
  Eigen::MatrixXd g = (2.0 / batch) * diff;  // d loss / d post[l + 1]
  for (std::size_t l = n_layers; l-- > 0;) {
    DenseLayer& out = (*grad)[l];
    out.snake_a = 0.0;
    if (l + 1 < n_layers) {
      const double a = layers[l].snake_a;
      if (activation == ActivationKind::Snake)
        out.snake_a = g.cwiseProduct(pre[l].unaryExpr([a](double x) {
                          return snake_frequency_derivative(a, x);
                        })).sum();
      g = g.cwiseProduct(activate_derivative(activation, a, pre[l]));
    }
    out.weight.noalias() = g * post[l].transpose();
    out.bias = g.rowwise().sum();
    if (l > 0) g = layers[l].weight.transpose() * g;
  }
  return loss;
}

NeuralMap init_network(const MlpConfig& config) {
  config.validate();
  NeuralMap net;
  net.config = config;
  net.input_scaler = AffineScaler::identity(config.input_dim);
  net.output_scaler = AffineScaler::identity(config.output_dim);

  std::vector<Eigen::Index> widths;
  widths.push_back(config.input_dim);
  widths.insert(widths.end(), config.hidden_layers.begin(), config.hidden_layers.end());
  widths.push_back(config.output_dim);

  Rng rng(config.seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    const Eigen::Index fan_in = widths[l];
    const Eigen::Index fan_out = widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    layer.weight.resize(fan_out, fan_in);
    for (Eigen::Index j = 0; j < fan_in; ++j)
      for (Eigen::Index i = 0; i < fan_out; ++i) layer.weight(i, j) = uniform(rng, -limit, limit);
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.snake_a = config.snake_a;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Eigen::MatrixXd NeuralMap::forward_batch(const Eigen::MatrixXd& mus) const {
  if (mus.rows() != config.input_dim)
    throw std::invalid_argument("NeuralMap: parameter has dimension " + std::to_string(mus.rows()) +
                                ", expected " + std::to_string(config.input_dim));
  return output_scaler.inverse(network_output(layers, config.activation, input_scaler.transform(mus)));
}

Eigen::VectorXd NeuralMap::forward(const Eigen::VectorXd& mu) const {
  return forward_batch(mu);
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  long step = 0;

  explicit AdamState(const std::vector<DenseLayer>& layers) {
    for (const auto& l : layers) {
      DenseLayer z{Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                   Eigen::VectorXd::Zero(l.bias.size()), 0.0};
      m.push_back(z);
      v.push_back(z);
    }
  }

  void update(std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& grad,
              const MlpConfig& c) {
    ++step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
    const double lr = c.learning_rate;
    auto apply = [&](auto& param, auto& mom, auto& vel, const auto& g) {
      mom = c.beta1 * mom + (1.0 - c.beta1) * g;
      vel = c.beta2 * vel + (1.0 - c.beta2) * g.cwiseProduct(g);
      param.array() -= lr * (mom.array() / bc1) / ((vel.array() / bc2).sqrt() + c.epsilon);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      apply(layers[l].weight, m[l].weight, v[l].weight, grad[l].weight);
      apply(layers[l].bias, m[l].bias, v[l].bias, grad[l].bias);
      if (c.snake_trainable && c.activation == ActivationKind::Snake && l + 1 < layers.size()) {
        const double g = grad[l].snake_a;
        m[l].snake_a = c.beta1 * m[l].snake_a + (1.0 - c.beta1) * g;
        v[l].snake_a = c.beta2 * v[l].snake_a + (1.0 - c.beta2) * g * g;
        layers[l].snake_a -= lr * (m[l].snake_a / bc1) / (std::sqrt(v[l].snake_a / bc2) + c.epsilon);
        layers[l].snake_a = std::max(layers[l].snake_a, 1e-6);
      }
    }
  }
};

}  // namespace

NeuralMap train(const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& train_targets,
                const Eigen::MatrixXd& valid_inputs, const Eigen::MatrixXd& valid_targets,
                const MlpConfig& config, double t_star) {
  config.validate();
  const Eigen::Index n = train_inputs.cols();
  if (n < 1) throw std::invalid_argument("train: need at least one training pair");
  if (train_inputs.rows() != config.input_dim || train_targets.rows() != config.output_dim ||
      train_targets.cols() != n)
    throw std::invalid_argument("train: training data dimensions do not match the config");
  const bool has_valid = valid_inputs.cols() > 0;
  if (has_valid && (valid_inputs.rows() != config.input_dim || valid_targets.rows() != config.output_dim ||
                    valid_targets.cols() != valid_inputs.cols()))
    throw std::invalid_argument("train: validation data dimensions do not match the config");
  if (!train_inputs.allFinite() || !train_targets.allFinite() ||
      (has_valid && (!valid_inputs.allFinite() || !valid_targets.allFinite())))
    throw std::invalid_argument("train: data contain non-finite entries");

  NeuralMap net = init_network(config);
  net.t_star = t_star;
  net.input_scaler = AffineScaler::min_max(train_inputs);
  net.output_scaler = AffineScaler::standardize(train_targets);

  const Eigen::MatrixXd xs = net.input_scaler.transform(train_inputs);
  const Eigen::MatrixXd ys = net.output_scaler.transform(train_targets);
  Eigen::MatrixXd vxs, vys;
  if (has_valid) {
    vxs = net.input_scaler.transform(valid_inputs);
    vys = net.output_scaler.transform(valid_targets);
  }

  Rng rng(derive_seed(config.seed, 1));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  AdamState adam(net.layers);
  std::vector<DenseLayer> grad;
  std::vector<DenseLayer> best = net.layers;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  const auto batch = static_cast<Eigen::Index>(config.batch_size);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle(order, rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      const std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
      const Eigen::MatrixXd bx = xs(Eigen::all, idx);
      const Eigen::MatrixXd by = ys(Eigen::all, idx);
      loss_and_gradient(net.layers, config.activation, bx, by, &grad);
      adam.update(net.layers, grad, config);
    }

    const double train_loss = loss_and_gradient(net.layers, config.activation, xs, ys, nullptr);
    const double valid_loss =
        has_valid ? loss_and_gradient(net.layers, config.activation, vxs, vys, nullptr) : train_loss;
    if (!std::isfinite(train_loss) || !std::isfinite(valid_loss))
      throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));
    net.history.push_back({train_loss, valid_loss});
    if (valid_loss < best_loss) {
      best_loss = valid_loss;
      best_epoch = epoch;
      best = net.layers;
    } else if (epoch - best_epoch >= config.patience) {
      break;
    }
  }

  net.layers = std::move(best);
  net.best_epoch = best_epoch;
  net.best_valid_loss = best_loss;
  return net;
}

}  // namespace plando
