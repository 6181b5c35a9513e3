#include "plando/pipeline.hpp"

#include "plando/errors.hpp"
#include "plando/parallel.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace plando {
namespace {

std::string format_mu(const Eigen::VectorXd& mu) {
  std::ostringstream out;
  out.precision(10);
  out << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i) out << (i ? ", " : "") << mu(i);
  out << ')';
  return out.str();
}

std::vector<BundleEntry> fit_all(const std::vector<ParameterInstance>& instances, const KernelSpec& kernel,
                                 double nu, std::uint64_t seed, const FitOptions& options) {
  std::vector<BundleEntry> out(instances.size());
  parallel_for(instances.size(), [&](std::size_t i) {
    const ParameterInstance& inst = instances[i];
    try {
      out[i] = {inst.mu, fit(inst.snapshots, kernel, nu, seed, options)};
    } catch (const std::exception& e) {
      throw NumericalError("offline fit failed for mu = " + format_mu(inst.mu) + ": " + e.what());
    }
  });
  return out;
}

Eigen::MatrixXd stack_mus(const std::vector<BundleEntry>& entries) {
  if (entries.empty()) return {};
  Eigen::MatrixXd mus(entries.front().mu.size(), static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) mus.col(static_cast<Eigen::Index>(i)) = entries[i].mu;
  return mus;
}

}  // namespace

// ---------------------------------------------------------------------------
// Offline

Eigen::Index OfflineBundle::state_dim() const {
  return models.empty() ? 0 : models.front().model.state_dim();
}

Eigen::Index OfflineBundle::param_dim() const {
  return models.empty() ? 0 : models.front().mu.size();
}

std::vector<double> OfflineBundle::fit_residuals() const {
  std::vector<double> r;
  for (const auto& e : models) r.push_back(e.model.fit_residual);
  return r;
}

std::vector<Eigen::Index> OfflineBundle::dictionary_sizes() const {
  std::vector<Eigen::Index> m;
  for (const auto& e : models) m.push_back(e.model.dictionary_size());
  return m;
}

OfflineBundle offline(const std::vector<ParameterInstance>& train, const KernelSpec& kernel, double nu,
                      std::uint64_t seed, const std::vector<ParameterInstance>& valid,
                      const FitOptions& fit_options) {
  if (train.empty()) throw std::invalid_argument("offline: need at least one training instance");
  kernel.validate();
  const ParameterInstance& first = train.front();
  const double dt = first.snapshots.dt();
  for (const auto* set : {&train, &valid})
    for (const auto& inst : *set) {
      if (inst.mu.size() != first.mu.size() || inst.snapshots.state_dim() != first.snapshots.state_dim())
        throw std::invalid_argument("offline: inconsistent parameter or state dimensions at mu = " +
                                    format_mu(inst.mu));
      if (inst.snapshots.mode != first.snapshots.mode)
        throw std::invalid_argument("offline: mixed continuous/discrete instances");
      if (std::abs(inst.snapshots.dt() - dt) > 1e-12 * std::max(1.0, dt))
        throw std::invalid_argument("offline: instances use different snapshot spacings");
    }

  OfflineBundle bundle;
  bundle.kernel = kernel;
  bundle.nu = nu;
  bundle.seed = seed;
  bundle.mode = first.snapshots.mode;
  bundle.dt = dt;
  bundle.train_t_end = first.snapshots.times(first.snapshots.times.size() - 1);
  bundle.initial_state = first.snapshots.X.col(0);
  bundle.models = fit_all(train, kernel, nu, seed, fit_options);
  bundle.valid_models = fit_all(valid, kernel, nu, seed, fit_options);

  const Eigen::MatrixXd mus = stack_mus(bundle.models);
  for (Eigen::Index d = 0; d < mus.rows(); ++d)
    bundle.bounds.emplace_back(mus.row(d).minCoeff(), mus.row(d).maxCoeff());
  return bundle;
}

// ---------------------------------------------------------------------------
// Online

Eigen::MatrixXd generate_at(const std::vector<BundleEntry>& models, Mode mode, double dt, double t_star,
                            const Eigen::VectorXd& x0, std::optional<double> step) {
  if (!(t_star >= 0.0) || !std::isfinite(t_star)) throw std::invalid_argument("generate_at: t_star must be >= 0");
  const auto count = static_cast<Eigen::Index>(models.size());
  Eigen::MatrixXd out(x0.size(), count);
  if (t_star == 0.0) {
    out.colwise() = x0;
    return out;
  }

  long steps = 0;
  if (mode == Mode::Discrete) {
    if (!(dt > 0.0)) throw std::invalid_argument("generate_at: discrete models need dt > 0");
    steps = std::lround(t_star / dt);
    if (std::abs(static_cast<double>(steps) * dt - t_star) > 1e-9 * std::max(1.0, t_star))
      std::clog << "warning: t* = " << t_star << " is not on the snapshot grid (dt = " << dt
                << "); rounded to " << static_cast<double>(steps) * dt << '\n';
  }
  const double h = step.value_or(dt);
  if (mode == Mode::Continuous && !(h > 0.0)) throw std::invalid_argument("generate_at: integration step must be > 0");

  parallel_for(models.size(), [&](std::size_t i) {
    const BundleEntry& e = models[i];
    try {
      const Trajectory traj = mode == Mode::Continuous ? integrate(e.model, x0, t_star, h)
                                                       : rollout(e.model, x0, steps, dt);
      out.col(static_cast<Eigen::Index>(i)) = traj.final_state();
    } catch (const BlowUpError& err) {
      throw BlowUpError("generation failed for mu = " + format_mu(e.mu) + ": " + err.what(), err.time());
    }
  });
  return out;
}

Eigen::MatrixXd generate_at(const OfflineBundle& bundle, double t_star, const Eigen::VectorXd& x0,
                            std::optional<double> step) {
  return generate_at(bundle.models, bundle.mode, bundle.dt, t_star, x0, step);
}

OnlineModel online(const OfflineBundle& bundle, double t_star, const Eigen::VectorXd& x0,
                   const OnlineOptions& options) {
  if (bundle.models.empty()) throw std::invalid_argument("online: empty bundle");
  if (x0.size() != bundle.state_dim()) throw std::invalid_argument("online: x0 has the wrong dimension");

  OnlineModel model;
  model.t_star = t_star;
  model.x0 = x0;
  model.step = options.step.value_or(bundle.dt);
  model.extrapolated = t_star > bundle.train_t_end * (1.0 + 1e-12);
  model.bounds = bundle.bounds;
  model.state_dim = bundle.state_dim();

  const std::vector<double> residuals = bundle.fit_residuals();
  for (double r : residuals) {
    model.mean_fit_residual += r / static_cast<double>(residuals.size());
    model.max_fit_residual = std::max(model.max_fit_residual, r);
  }

  const Eigen::MatrixXd train_mus = stack_mus(bundle.models);
  const Eigen::MatrixXd valid_mus = stack_mus(bundle.valid_models);
  Eigen::MatrixXd train_states = generate_at(bundle.models, bundle.mode, bundle.dt, t_star, x0, options.step);
  Eigen::MatrixXd valid_states;
  if (!bundle.valid_models.empty())
    valid_states = generate_at(bundle.valid_models, bundle.mode, bundle.dt, t_star, x0, options.step);

  Eigen::MatrixXd train_targets = train_states;
  Eigen::MatrixXd valid_targets = valid_states;
  if (options.pod) {
    model.pod = options.pod->fixed_rank ? compute_pod_rank(train_states, *options.pod->fixed_rank)
                                        : compute_pod(train_states, options.pod->energy_threshold);
    train_targets = project_columns(*model.pod, train_states);
    if (valid_states.size() > 0) valid_targets = project_columns(*model.pod, valid_states);
    const double norm = train_states.norm();
    model.pod_projection_error =
        norm > 0.0 ? (train_states - reconstruct_columns(*model.pod, train_targets)).norm() / norm : 0.0;
  }

  MlpConfig mlp = options.mlp;
  mlp.input_dim = bundle.param_dim();
  mlp.output_dim = train_targets.rows();
  model.map = train(train_mus, train_targets, valid_mus, valid_targets, mlp, t_star);
  return model;
}

Prediction predict_checked(const OnlineModel& model, const Eigen::VectorXd& mu) {
  if (mu.size() != model.map.config.input_dim)
    throw std::invalid_argument("predict: parameter has dimension " + std::to_string(mu.size()) +
                                ", model expects " + std::to_string(model.map.config.input_dim));
  Prediction p;
  for (std::size_t d = 0; d < model.bounds.size() && d < static_cast<std::size_t>(mu.size()); ++d) {
    const auto [lo, hi] = model.bounds[d];
    const double slack = 1e-9 * std::max(1.0, std::abs(hi - lo));
    if (mu(static_cast<Eigen::Index>(d)) < lo - slack || mu(static_cast<Eigen::Index>(d)) > hi + slack)
      p.extrapolated_parameter = true;
  }
  const Eigen::VectorXd out = model.map.forward(mu);
  p.state = model.pod ? reconstruct(*model.pod, out) : out;
  return p;
}

Eigen::VectorXd predict(const OnlineModel& model, const Eigen::VectorXd& mu) {
  Prediction p = predict_checked(model, mu);
  if (p.extrapolated_parameter)
    std::clog << "warning: mu = " << format_mu(mu) << " lies outside the training parameter box\n";
  return std::move(p.state);
}

// ---------------------------------------------------------------------------
// Evaluation

double relative_l2_error(const Eigen::VectorXd& reference, const Eigen::VectorXd& prediction) {
  if (reference.size() != prediction.size()) throw std::invalid_argument("relative_l2_error: dimension mismatch");
  const double norm = reference.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("relative_l2_error: reference state has zero norm");
  return (reference - prediction).norm() / norm;
}

std::pair<double, double> mean_and_std(const Eigen::VectorXd& errors) {
  if (errors.size() == 0) throw std::invalid_argument("mean_and_std: empty error list");
  const double n = static_cast<double>(errors.size());
  const double mean = errors.sum() / n;
  const double var = (errors.array() - mean).square().sum() / n;
  return {mean, std::sqrt(var)};
}

ErrorReport evaluate(const OnlineModel& model, const Eigen::MatrixXd& test_mus,
                     const Eigen::MatrixXd& references) {
  if (test_mus.cols() < 1) throw std::invalid_argument("evaluate: empty test set");
  if (test_mus.cols() != references.cols())
    throw std::invalid_argument("evaluate: parameter and reference counts differ");
  if (references.rows() != model.state_dim)
    throw std::invalid_argument("evaluate: reference states have the wrong dimension");

  ErrorReport report;
  report.t_star = model.t_star;
  report.count = test_mus.cols();
  report.errors.resize(report.count);
  const Eigen::MatrixXd reduced = model.map.forward_batch(test_mus);
  const Eigen::MatrixXd predicted = model.pod ? reconstruct_columns(*model.pod, reduced) : reduced;
  for (Eigen::Index i = 0; i < report.count; ++i)
    report.errors(i) = relative_l2_error(references.col(i), predicted.col(i));
  std::tie(report.mean, report.std_dev) = mean_and_std(report.errors);
  report.extrapolated = model.extrapolated;
  report.mean_fit_residual = model.mean_fit_residual;
  report.pod_projection_error = model.pod_projection_error;
  report.dnn_valid_loss = model.map.best_valid_loss;
  report.pod_rank = model.pod ? model.pod->rank() : 0;
  return report;
}

}  // namespace plando
