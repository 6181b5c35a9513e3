#include "plando/lando.hpp"

#include "plando/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace plando {

std::string to_string(Mode mode) {
  return mode == Mode::Continuous ? "continuous" : "discrete";
}

Mode mode_from_string(const std::string& name) {
  if (name == "continuous") return Mode::Continuous;
  if (name == "discrete") return Mode::Discrete;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// SnapshotSet

SnapshotSet SnapshotSet::discrete(Eigen::MatrixXd X, Eigen::VectorXd times) {
  SnapshotSet s;
  s.mode = Mode::Discrete;
  if (X.cols() >= 2) s.Y = X.rightCols(X.cols() - 1);
  s.X = std::move(X);
  s.times = std::move(times);
  s.validate();
  return s;
}

SnapshotSet SnapshotSet::continuous(Eigen::MatrixXd X, Eigen::VectorXd times) {
  SnapshotSet s;
  s.mode = Mode::Continuous;
  s.X = std::move(X);
  s.times = std::move(times);
  if (s.times.size() < 2) throw std::invalid_argument("continuous snapshot set needs at least 3 snapshots");
  s.Y = derivative_targets(s.X, s.dt());
  s.validate();
  return s;
}

SnapshotSet SnapshotSet::continuous(Eigen::MatrixXd X, Eigen::VectorXd times, Eigen::MatrixXd Y) {
  SnapshotSet s;
  s.mode = Mode::Continuous;
  s.X = std::move(X);
  s.times = std::move(times);
  s.Y = std::move(Y);
  s.validate();
  return s;
}

double SnapshotSet::dt() const {
  if (times.size() < 2) throw std::invalid_argument("snapshot set has fewer than two times");
  return (times(times.size() - 1) - times(0)) / static_cast<double>(times.size() - 1);
}

Eigen::MatrixXd SnapshotSet::inputs() const {
  return mode == Mode::Discrete ? Eigen::MatrixXd(X.leftCols(X.cols() - 1)) : X;
}

void SnapshotSet::validate() const {
  const Eigen::Index n_t = X.cols();
  if (X.rows() < 1 || n_t < 2) throw std::invalid_argument("snapshot set needs N >= 1 and at least 2 snapshots");
  if (times.size() != n_t)
    throw std::invalid_argument("snapshot set: " + std::to_string(times.size()) + " times for " +
                                std::to_string(n_t) + " snapshots");
  if (!X.allFinite() || !times.allFinite()) throw std::invalid_argument("snapshot set has non-finite entries");
  const double step = dt();
  if (!(step > 0.0)) throw std::invalid_argument("snapshot times must be strictly increasing");
  const double scale = std::max({std::abs(times(0)), std::abs(times(n_t - 1)), step});
  for (Eigen::Index j = 1; j < n_t; ++j) {
    const double gap = times(j) - times(j - 1);
    if (!(gap > 0.0)) throw std::invalid_argument("snapshot times must be strictly increasing");
    if (std::abs(gap - step) > 1e-12 * scale)
      throw std::invalid_argument("snapshot times must be uniformly spaced");
  }
  const Eigen::Index expected = mode == Mode::Discrete ? n_t - 1 : n_t;
  if (Y.rows() != X.rows() || Y.cols() != expected)
    throw std::invalid_argument("snapshot targets have shape " + std::to_string(Y.rows()) + "x" +
                                std::to_string(Y.cols()) + ", expected " + std::to_string(X.rows()) +
                                "x" + std::to_string(expected));
  if (!Y.allFinite()) throw std::invalid_argument("snapshot targets have non-finite entries");
  if (mode == Mode::Discrete && Y != X.rightCols(n_t - 1))
    throw std::invalid_argument("discrete targets must equal the shifted snapshots");
}

Eigen::MatrixXd derivative_targets(const Eigen::MatrixXd& X, double dt) {
  const Eigen::Index n_t = X.cols();
  if (n_t < 3) throw std::invalid_argument("derivative_targets needs at least 3 snapshots");
  if (!(dt > 0.0)) throw std::invalid_argument("derivative_targets needs dt > 0");
  Eigen::MatrixXd D(X.rows(), n_t);
  const double h2 = 2.0 * dt;
  D.col(0) = (-3.0 * X.col(0) + 4.0 * X.col(1) - X.col(2)) / h2;
  for (Eigen::Index j = 1; j + 1 < n_t; ++j) D.col(j) = (X.col(j + 1) - X.col(j - 1)) / h2;
  D.col(n_t - 1) = (3.0 * X.col(n_t - 1) - 4.0 * X.col(n_t - 2) + X.col(n_t - 3)) / h2;
  return D;
}

// ---------------------------------------------------------------------------
// Fitting

LandoModel fit(const SnapshotSet& snapshots, const KernelSpec& kernel, double nu, std::uint64_t seed,
               const FitOptions& options) {
  snapshots.validate();
  if (!(options.rcond > 0.0 && options.rcond < 1.0)) throw std::invalid_argument("rcond must lie in (0, 1)");

  const Eigen::MatrixXd inputs = snapshots.inputs();
  LandoModel model;
  model.kernel = kernel;
  model.mode = snapshots.mode;
  model.dictionary = build_dictionary(kernel, inputs, nu, seed, options.jitter);

  // W = Y pinv(K) with K = k(X~, X) (m x Nt'). K is a product of two feature
  // matrices, so its singular values spread over twice the decades of the
  // data; a relative cutoff on K itself drops directions the dynamics need.
  // Solve in the dictionary's Cholesky coordinates instead: with
  // Q = L^{-1} K, min |Y - V Q| gives V = Y pinv(Q) and W = V L^{-1}.
  const Eigen::MatrixXd K = eval_matrix(kernel, model.dictionary.columns, inputs);
  const auto L = model.dictionary.chol.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd Q = L.solve(K);
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
      Q.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  if (!(sigma_max > 0.0) || !std::isfinite(sigma_max))
    throw NumericalError("degenerate kernel matrix: no singular value above cutoff");
  const double cutoff = options.rcond * sigma_max;

  // Q^T = U S V^T  =>  pinv(Q) = U S^+ V^T  (Nt' x m)
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) inv_sigma(i) = 1.0 / sigma(i);
  const Eigen::MatrixXd V = (snapshots.Y * svd.matrixU()) * inv_sigma.asDiagonal() * svd.matrixV().transpose();
  // W = V L^{-1}  <=>  L^T W^T = V^T
  model.weights = model.dictionary.chol.transpose().triangularView<Eigen::Upper>().solve(V.transpose()).transpose();

  const double y_norm = snapshots.Y.norm();
  model.fit_residual = y_norm > 0.0 ? (snapshots.Y - model.weights * K).norm() / y_norm : 0.0;
  return model;
}

double relative_fit_residual(const LandoModel& model, const SnapshotSet& snapshots) {
  const Eigen::MatrixXd K = eval_matrix(model.kernel, model.dictionary.columns, snapshots.inputs());
  const double y_norm = snapshots.Y.norm();
  return y_norm > 0.0 ? (snapshots.Y - model.weights * K).norm() / y_norm : 0.0;
}

Eigen::VectorXd predict_dynamics(const LandoModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.state_dim())
    throw std::invalid_argument("predict_dynamics: state has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.state_dim()));
  return model.weights * eval_matrix(model.kernel, model.dictionary.columns, x);
}

// ---------------------------------------------------------------------------
// Forward simulation

namespace {

[[noreturn]] void throw_blow_up(const char* where, double t) {
  std::ostringstream msg;
  msg << where << ": non-finite state at t = " << t;
  throw BlowUpError(msg.str(), t);
}

}  // namespace

Trajectory integrate(const LandoModel& model, const Eigen::VectorXd& x0, double t_end, double step) {
  if (model.mode != Mode::Continuous) throw std::invalid_argument("integrate requires a continuous-time model");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("integrate: t_end must be > 0");
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("integrate: step must be > 0");
  if (x0.size() != model.state_dim()) throw std::invalid_argument("integrate: initial state dimension mismatch");

  // Absorb round-off in t_end / step so an exact multiple does not produce a
  // vanishing final step.
  const auto n_steps = static_cast<Eigen::Index>(std::max(1.0, std::ceil(t_end / step - 1e-9)));
  Trajectory traj;
  traj.times.resize(n_steps + 1);
  traj.states.resize(x0.size(), n_steps + 1);
  traj.times(0) = 0.0;
  traj.states.col(0) = x0;

  auto rhs = [&model](const Eigen::VectorXd& s, double t) {
    if (!s.allFinite()) throw_blow_up("integrate", t);
    return predict_dynamics(model, s);
  };

  Eigen::VectorXd x = x0;
  for (Eigen::Index k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * step;
    const double t_next = k + 1 == n_steps ? t_end : static_cast<double>(k + 1) * step;
    const double h = t_next - t;
    const Eigen::VectorXd k1 = rhs(x, t);
    const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::VectorXd k4 = rhs(x + h * k3, t_next);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw_blow_up("integrate", t_next);
    traj.times(k + 1) = t_next;
    traj.states.col(k + 1) = x;
  }
  return traj;
}

Trajectory rollout(const LandoModel& model, const Eigen::VectorXd& x0, long steps, double dt) {
  if (model.mode != Mode::Discrete) throw std::invalid_argument("rollout requires a discrete-time model");
  if (steps < 0) throw std::invalid_argument("rollout: steps must be >= 0");
  if (x0.size() != model.state_dim()) throw std::invalid_argument("rollout: initial state dimension mismatch");
  Trajectory traj;
  traj.times.resize(steps + 1);
  traj.states.resize(x0.size(), steps + 1);
  traj.times(0) = 0.0;
  traj.states.col(0) = x0;
  for (long j = 0; j < steps; ++j) {
    traj.states.col(j + 1) = predict_dynamics(model, traj.states.col(j));
    traj.times(j + 1) = static_cast<double>(j + 1) * dt;
    if (!traj.states.col(j + 1).allFinite()) throw_blow_up("rollout", traj.times(j + 1));
  }
  return traj;
}

}  // namespace plando
