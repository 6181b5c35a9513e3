#include "plando/scenarios.hpp"

#include "plando/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace plando {
namespace {

std::vector<double> evenly_spaced(double first, double step, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(first + step * k);
  return out;
}

Split simulate_split(const ScenarioConfig& config, const Eigen::MatrixXd& mus, const Eigen::VectorXd& times,
                     const std::optional<Eigen::VectorXd>& initial = std::nullopt) {
  Split split;
  split.mus = mus;
  split.times = times;
  split.states.assign(static_cast<std::size_t>(mus.cols()), Eigen::MatrixXd(config.state_dim(), 0));
  if (times.size() == 0) return split;
  parallel_for(split.states.size(), [&](std::size_t i) {
    split.states[i] = reference_states(config, mus.col(static_cast<Eigen::Index>(i)), times, initial);
  });
  return split;
}

}  // namespace

bool is_known_system(const std::string& system) {
  return system == "lv" || system == "lv2" || system == "heat" || system == "allen-cahn";
}

ScenarioConfig ScenarioConfig::defaults(const std::string& system) {
  ScenarioConfig c;
  c.system = system;
  if (system == "lv" || system == "lv2") {
    c.x0 = Eigen::Vector2d(80.0, 20.0);
    c.t_end = 400.0;
    c.n_snapshots = 601;
    if (system == "lv") {
      c.bounds = {{0.015, 0.1}};
      c.n_train = 150;
      c.n_valid = 50;
      c.n_test = 100;
      c.test_times = evenly_spaced(50.0, 50.0, 12);
    } else {
      c.bounds = {{0.015, 0.1}, {0.0012, 0.0022}};
      c.n_train = 300;
      c.n_valid = 100;
      c.n_test = 300;
      c.test_times = {100.0, 500.0};
    }
  } else if (system == "heat") {
    c.bounds = {{0.5, 1.0}};
    c.n_train = 100;
    c.n_valid = 30;
    c.n_test = 60;
    c.t_end = 2.0;
    c.n_snapshots = 201;
    c.test_times = {0.15};
    for (int k = 1; k <= 16; ++k) c.test_times.push_back(0.25 * k);
  } else if (system == "allen-cahn") {
    c.bounds = {{1e-4, 1e-3}, {0.5, 4.0}};
    c.n_train = 200;
    c.n_valid = 60;
    c.n_test = 100;
    c.t_end = 0.6;
    c.n_snapshots = 121;
    for (int k = 1; k <= 19; ++k) c.test_times.push_back(k / 20.0);
  } else {
    throw std::invalid_argument("unknown system '" + system + "' (expected lv, lv2, heat or allen-cahn)");
  }
  return c;
}

Eigen::Index ScenarioConfig::state_dim() const {
  if (system == "heat") return heat.state_dim();
  if (system == "allen-cahn") return allen_cahn.state_dim();
  return 2;
}

Mode ScenarioConfig::mode() const {
  return system == "lv" || system == "lv2" ? Mode::Continuous : Mode::Discrete;
}

Eigen::VectorXd ScenarioConfig::train_grid() const { return uniform_grid(0.0, t_end, n_snapshots); }

Eigen::VectorXd ScenarioConfig::default_initial_state() const {
  if (system == "heat") return heat_initial_condition(heat);
  if (system == "allen-cahn") return allen_cahn_initial_condition(allen_cahn);
  return x0;
}

void ScenarioConfig::validate() const {
  if (!is_known_system(system)) throw std::invalid_argument("unknown system '" + system + "'");
  const Eigen::Index expected = system == "lv2" || system == "allen-cahn" ? 2 : 1;
  if (param_dim() != expected)
    throw std::invalid_argument("system " + system + " needs " + std::to_string(expected) + " parameter bound(s)");
  ParameterDesign{bounds, n_train, n_valid, n_test, seed}.validate();
  if (!(t_end > 0.0) || n_snapshots < 3) throw std::invalid_argument("training grid needs t_end > 0 and >= 3 snapshots");
  for (double t : test_times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("test times must be finite and >= 0");
  if (!std::is_sorted(test_times.begin(), test_times.end()) ||
      std::adjacent_find(test_times.begin(), test_times.end()) != test_times.end())
    throw std::invalid_argument("test times must be strictly increasing");
  if (system == "lv" || system == "lv2") {
    if (x0.size() != 2 || (test_x0 && test_x0->size() != 2))
      throw std::invalid_argument("Lotka-Volterra x0 must have two entries");
    lv.validate();
  } else if (system == "heat") {
    heat.validate();
    if (test_x0 && test_x0->size() != heat.state_dim()) throw std::invalid_argument("test_x0 has the wrong dimension");
  } else {
    allen_cahn.validate();
    if (test_x0 && test_x0->size() != allen_cahn.state_dim()) throw std::invalid_argument("test_x0 has the wrong dimension");
  }
}

LotkaVolterraParams lotka_volterra_params(const ScenarioConfig& config, const Eigen::VectorXd& mu) {
  LotkaVolterraParams p = config.lv;
  if (config.system == "lv" && mu.size() == 1) {
    p.alpha = mu(0);
  } else if (config.system == "lv2" && mu.size() == 2) {
    p.alpha = mu(0);
    p.beta = mu(1);
  } else {
    throw std::invalid_argument("parameter vector does not match system " + config.system);
  }
  return p;
}

HeatParams heat_params(const ScenarioConfig& config, const Eigen::VectorXd& mu) {
  if (config.system != "heat" || mu.size() != 1)
    throw std::invalid_argument("parameter vector does not match system " + config.system);
  HeatParams p = config.heat;
  p.diffusivity = mu(0);
  return p;
}

AllenCahnParams allen_cahn_params(const ScenarioConfig& config, const Eigen::VectorXd& mu) {
  if (config.system != "allen-cahn" || mu.size() != 2)
    throw std::invalid_argument("parameter vector does not match system " + config.system);
  AllenCahnParams p = config.allen_cahn;
  p.lambda = mu(0);
  p.epsilon = mu(1);
  return p;
}

Eigen::MatrixXd reference_states(const ScenarioConfig& config, const Eigen::VectorXd& mu,
                                 const Eigen::VectorXd& times, const std::optional<Eigen::VectorXd>& initial) {
  const Eigen::VectorXd x0 = initial.value_or(config.default_initial_state());
  if (config.system == "heat") return heat_states(heat_params(config, mu), times, x0);
  if (config.system == "allen-cahn") return allen_cahn_states(allen_cahn_params(config, mu), times, x0);
  if (x0.size() != 2) throw std::invalid_argument("Lotka-Volterra initial state must have two entries");
  return lotka_volterra_states(lotka_volterra_params(config, mu), Eigen::Vector2d(x0), times, config.ode_tolerances);
}

Eigen::MatrixXd reference_at(const ScenarioConfig& config, const Eigen::MatrixXd& mus, double t,
                             const std::optional<Eigen::VectorXd>& initial) {
  Eigen::MatrixXd out(config.state_dim(), mus.cols());
  if (t == 0.0) {
    out.colwise() = initial.value_or(config.default_initial_state());
    return out;
  }
  const Eigen::VectorXd times = Eigen::VectorXd::Constant(1, t);
  parallel_for(static_cast<std::size_t>(mus.cols()), [&](std::size_t i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.col(c) = reference_states(config, mus.col(c), times, initial).col(0);
  });
  return out;
}

SnapshotSet training_snapshots(const ScenarioConfig& config, const Eigen::VectorXd& mu,
                               const Eigen::MatrixXd& states, const Eigen::VectorXd& times,
                               DerivativeSource targets) {
  if (config.mode() == Mode::Discrete) return SnapshotSet::discrete(states, times);
  if (targets == DerivativeSource::FiniteDifference) return SnapshotSet::continuous(states, times);
  const LotkaVolterraParams p = lotka_volterra_params(config, mu);
  Eigen::MatrixXd Y(states.rows(), states.cols());
  for (Eigen::Index k = 0; k < states.cols(); ++k) Y.col(k) = lotka_volterra_rhs(p, states.col(k));
  return SnapshotSet::continuous(states, times, std::move(Y));
}

Eigen::MatrixXd Split::states_at(double t) const {
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    if (std::abs(times(k) - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
      Eigen::MatrixXd out(states.empty() ? 0 : states.front().rows(), size());
      for (Eigen::Index i = 0; i < size(); ++i) out.col(i) = states[static_cast<std::size_t>(i)].col(k);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "no stored reference states at t = " << t;
  throw std::invalid_argument(msg.str());
}

Dataset generate_dataset(const ScenarioConfig& config) {
  config.validate();
  const ParameterSamples samples =
      lhs_sample(ParameterDesign{config.bounds, config.n_train, config.n_valid, config.n_test, config.seed});
  Dataset ds;
  ds.config = config;
  const Eigen::VectorXd grid = config.train_grid();
  ds.train = simulate_split(config, samples.train, grid);
  ds.valid = simulate_split(config, samples.valid, grid);
  const Eigen::VectorXd test_times =
      Eigen::Map<const Eigen::VectorXd>(config.test_times.data(), static_cast<Eigen::Index>(config.test_times.size()));
  ds.test = simulate_split(config, samples.test, test_times, config.test_x0);
  return ds;
}

std::vector<ParameterInstance> to_instances(const ScenarioConfig& config, const Split& split,
                                            DerivativeSource targets) {
  std::vector<ParameterInstance> out(static_cast<std::size_t>(split.size()));
  for (Eigen::Index i = 0; i < split.size(); ++i)
    out[static_cast<std::size_t>(i)] = {split.mus.col(i),
                                        training_snapshots(config, split.mus.col(i),
                                                           split.states[static_cast<std::size_t>(i)], split.times,
                                                           targets)};
  return out;
}

}  // namespace plando
