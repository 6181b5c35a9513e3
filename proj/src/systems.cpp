#include "plando/systems.hpp"

#include "plando/errors.hpp"
#include "plando/random.hpp"

#include <Eigen/Sparse>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace plando {

Eigen::VectorXd uniform_grid(double t0, double t_end, Eigen::Index count) {
  if (count < 1) throw std::invalid_argument("uniform_grid: count must be >= 1");
  if (count == 1) return Eigen::VectorXd::Constant(1, t0);
  if (!(t_end > t0)) throw std::invalid_argument("uniform_grid: t_end must exceed t0");
  return Eigen::VectorXd::LinSpaced(count, t0, t_end);
}

namespace {

void require_time_grid(const Eigen::VectorXd& t_grid) {
  if (t_grid.size() < 1) throw std::invalid_argument("time grid is empty");
  if (!t_grid.allFinite() || t_grid(0) < 0.0) throw std::invalid_argument("time grid must be finite and start at t >= 0");
  for (Eigen::Index k = 1; k < t_grid.size(); ++k)
    if (!(t_grid(k) > t_grid(k - 1))) throw std::invalid_argument("time grid must be strictly increasing");
}

// Number of fixed steps of size dt reaching each grid time.
std::vector<long> step_counts(const Eigen::VectorXd& t_grid, double dt) {
  require_time_grid(t_grid);
  std::vector<long> counts;
  counts.reserve(static_cast<std::size_t>(t_grid.size()));
  for (Eigen::Index k = 0; k < t_grid.size(); ++k) {
    const long n = std::lround(t_grid(k) / dt);
    if (std::abs(t_grid(k) - static_cast<double>(n) * dt) > 1e-9 * std::max(1.0, t_grid(k))) {
      std::ostringstream msg;
      msg << "time " << t_grid(k) << " is not a multiple of the solver step " << dt;
      throw std::invalid_argument(msg.str());
    }
    counts.push_back(n);
  }
  return counts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lotka-Volterra

void LotkaVolterraParams::validate() const {
  if (!(alpha > 0.0 && beta >= 0.0 && gamma >= 0.0 && delta >= 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta) || !std::isfinite(gamma) || !std::isfinite(delta))
    throw std::invalid_argument("Lotka-Volterra parameters must be finite, alpha > 0, others >= 0");
}

Eigen::Vector2d lotka_volterra_rhs(const LotkaVolterraParams& p, const Eigen::Vector2d& x) {
  return {p.alpha * x(0) - p.beta * x(0) * x(1), p.delta * x(0) * x(1) - p.gamma * x(1)};
}

double lotka_volterra_invariant(const LotkaVolterraParams& p, const Eigen::Vector2d& x) {
  return p.delta * x(0) - p.gamma * std::log(x(0)) + p.beta * x(1) - p.alpha * std::log(x(1));
}

Eigen::MatrixXd lotka_volterra_states(const LotkaVolterraParams& p, const Eigen::Vector2d& x0,
                                      const Eigen::VectorXd& t_grid, OdeTolerances tol) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  p.validate();
  require_time_grid(t_grid);
  if (!(x0(0) > 0.0 && x0(1) > 0.0)) throw std::invalid_argument("Lotka-Volterra initial state must be positive");

  std::vector<double> times;
  if (t_grid(0) > 0.0) times.push_back(0.0);
  for (Eigen::Index k = 0; k < t_grid.size(); ++k) times.push_back(t_grid(k));
  const std::size_t skip = times.size() - static_cast<std::size_t>(t_grid.size());

  auto rhs = [&p](const State& x, State& dxdt, double /*t*/) {
    dxdt[0] = p.alpha * x[0] - p.beta * x[0] * x[1];
    dxdt[1] = p.delta * x[0] * x[1] - p.gamma * x[1];
  };

  Eigen::MatrixXd out(2, t_grid.size());
  std::size_t seen = 0;
  auto observer = [&](const State& x, double /*t*/) {
    if (seen >= skip) {
      const auto col = static_cast<Eigen::Index>(seen - skip);
      out(0, col) = x[0];
      out(1, col) = x[1];
    }
    ++seen;
  };

  State x{x0(0), x0(1)};
  const double dt0 = times.size() > 1 ? std::min(1e-3, times[1] - times[0]) : 1e-3;
  try {
    odeint::integrate_times(odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>()),
                            rhs, x, times.begin(), times.end(), dt0, observer);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("Lotka-Volterra solver step failure: ") + e.what());
  }
  if (!out.allFinite()) throw NumericalError("Lotka-Volterra solver produced non-finite states");
  return out;
}

SnapshotSet solve_lotka_volterra(const LotkaVolterraParams& p, const Eigen::Vector2d& x0,
                                 const Eigen::VectorXd& t_grid, DerivativeSource targets,
                                 OdeTolerances tol) {
  Eigen::MatrixXd X = lotka_volterra_states(p, x0, t_grid, tol);
  if (targets == DerivativeSource::FiniteDifference) return SnapshotSet::continuous(std::move(X), t_grid);
  Eigen::MatrixXd Y(2, X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) Y.col(j) = lotka_volterra_rhs(p, X.col(j));
  return SnapshotSet::continuous(std::move(X), t_grid, std::move(Y));
}

// ---------------------------------------------------------------------------
// Heat equation

void HeatParams::validate() const {
  if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) throw std::invalid_argument("heat: diffusivity must be > 0");
  if (nx < 16 || ny < 16) throw std::invalid_argument("heat: grid must be at least 16x16");
  if (!(dt > 0.0) || !(length > 0.0)) throw std::invalid_argument("heat: dt and length must be > 0");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> heat_grid(const HeatParams& p) {
  Eigen::VectorXd xs(p.state_dim()), ys(p.state_dim());
  for (Eigen::Index j = 0; j < p.ny; ++j)
    for (Eigen::Index i = 0; i < p.nx; ++i) {
      xs(j * p.nx + i) = static_cast<double>(i + 1) * p.hx();
      ys(j * p.nx + i) = static_cast<double>(j + 1) * p.hy();
    }
  return {xs, ys};
}

Eigen::VectorXd heat_initial_condition(const HeatParams& p) {
  const auto [xs, ys] = heat_grid(p);
  const double a = p.alpha_ic;
  const double w = 0.2 * std::numbers::pi;
  auto profile = [a, w](double s) { return std::tanh(a * std::sin(w * s) / (1.0 - a * std::cos(w * s))); };
  Eigen::VectorXd u(p.state_dim());
  for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = profile(xs(k)) * profile(ys(k));
  return u;
}

Eigen::MatrixXd heat_states(const HeatParams& p, const Eigen::VectorXd& t_grid,
                            const std::optional<Eigen::VectorXd>& initial) {
  p.validate();
  const std::vector<long> counts = step_counts(t_grid, p.dt);
  const Eigen::Index n = p.state_dim();
  Eigen::VectorXd u = initial.value_or(heat_initial_condition(p));
  if (u.size() != n) throw std::invalid_argument("heat: initial state has the wrong dimension");

  // 5-point Laplacian with homogeneous Dirichlet boundary.
  const double cx = 1.0 / (p.hx() * p.hx());
  const double cy = 1.0 / (p.hy() * p.hy());
  std::vector<Eigen::Triplet<double>> lap;
  lap.reserve(static_cast<std::size_t>(5 * n));
  for (Eigen::Index j = 0; j < p.ny; ++j)
    for (Eigen::Index i = 0; i < p.nx; ++i) {
      const Eigen::Index k = j * p.nx + i;
      lap.emplace_back(k, k, -2.0 * (cx + cy));
      if (i > 0) lap.emplace_back(k, k - 1, cx);
      if (i + 1 < p.nx) lap.emplace_back(k, k + 1, cx);
      if (j > 0) lap.emplace_back(k, k - p.nx, cy);
      if (j + 1 < p.ny) lap.emplace_back(k, k + p.nx, cy);
    }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(lap.begin(), lap.end());
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  const double r = 0.5 * p.dt * p.diffusivity;
  const Eigen::SparseMatrix<double> lhs = I - r * L;
  const Eigen::SparseMatrix<double> rhs = I + r * L;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lhs);
  if (solver.info() != Eigen::Success) throw NumericalError("heat: singular Crank-Nicolson system");

  Eigen::MatrixXd out(n, t_grid.size());
  long done = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (; done < counts[k]; ++done) {
      u = solver.solve(rhs * u);
      if (solver.info() != Eigen::Success) throw NumericalError("heat: linear solve failed");
    }
    out.col(static_cast<Eigen::Index>(k)) = u;
  }
  if (!out.allFinite()) throw NumericalError("heat: non-finite solution");
  return out;
}

SnapshotSet solve_heat(const HeatParams& p, const Eigen::VectorXd& t_grid,
                       const std::optional<Eigen::VectorXd>& initial) {
  return SnapshotSet::discrete(heat_states(p, t_grid, initial), t_grid);
}

// ---------------------------------------------------------------------------
// Allen-Cahn

void AllenCahnParams::validate() const {
  if (!(lambda >= 0.0 && epsilon >= 0.0) || !std::isfinite(lambda) || !std::isfinite(epsilon))
    throw std::invalid_argument("Allen-Cahn: lambda and epsilon must be finite and >= 0");
  if (nx < 50) throw std::invalid_argument("Allen-Cahn: need at least 50 grid points");
  if (!(dt > 0.0)) throw std::invalid_argument("Allen-Cahn: dt must be > 0");
}

Eigen::VectorXd allen_cahn_grid(const AllenCahnParams& p) {
  Eigen::VectorXd x(p.state_dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = -1.0 + static_cast<double>(i + 1) * p.h();
  return x;
}

Eigen::VectorXd allen_cahn_initial_condition(const AllenCahnParams& p) {
  const Eigen::VectorXd x = allen_cahn_grid(p);
  return x.unaryExpr([](double s) { return s * s * std::cos(std::numbers::pi * s); });
}

Eigen::MatrixXd allen_cahn_states(const AllenCahnParams& p, const Eigen::VectorXd& t_grid,
                                  const std::optional<Eigen::VectorXd>& initial) {
  p.validate();
  const std::vector<long> counts = step_counts(t_grid, p.dt);
  const Eigen::Index n = p.state_dim();
  Eigen::VectorXd u = initial.value_or(allen_cahn_initial_condition(p));
  if (u.size() != n) throw std::invalid_argument("Allen-Cahn: initial state has the wrong dimension");

  // (I - dt lambda D2) u+ = u - dt eps f(u) + boundary terms, solved with a
  // pre-factored tridiagonal (Thomas) sweep.
  const double r = p.dt * p.lambda / (p.h() * p.h());
  const double diag = 1.0 + 2.0 * r;
  const double off = -r;
  Eigen::VectorXd c_prime(n);
  Eigen::VectorXd denom(n);
  denom(0) = diag;
  c_prime(0) = off / diag;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom(i) = diag - off * c_prime(i - 1);
    c_prime(i) = off / denom(i);
  }

  Eigen::MatrixXd out(n, t_grid.size());
  Eigen::VectorXd rhs(n);
  long done = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (; done < counts[k]; ++done) {
      rhs = u.array() - p.dt * p.epsilon * (u.array().cube() - u.array());
      rhs(0) += r * p.boundary_value;
      rhs(n - 1) += r * p.boundary_value;
      // forward sweep, then back substitution
      rhs(0) /= denom(0);
      for (Eigen::Index i = 1; i < n; ++i) rhs(i) = (rhs(i) - off * rhs(i - 1)) / denom(i);
      for (Eigen::Index i = n - 1; i-- > 0;) rhs(i) -= c_prime(i) * rhs(i + 1);
      u = rhs;
      if (!u.allFinite()) {
        const double t = static_cast<double>(done + 1) * p.dt;
        std::ostringstream msg;
        msg << "Allen-Cahn: blow-up at t = " << t;
        throw BlowUpError(msg.str(), t);
      }
    }
    out.col(static_cast<Eigen::Index>(k)) = u;
  }
  return out;
}

SnapshotSet solve_allen_cahn(const AllenCahnParams& p, const Eigen::VectorXd& t_grid,
                             const std::optional<Eigen::VectorXd>& initial) {
  return SnapshotSet::discrete(allen_cahn_states(p, t_grid, initial), t_grid);
}

// ---------------------------------------------------------------------------
// Latin hypercube

void ParameterDesign::validate() const {
  if (bounds.empty()) throw std::invalid_argument("parameter design needs at least one dimension");
  for (const auto& [lo, hi] : bounds)
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("parameter bounds must be finite with lower < upper");
  if (n_train < 1 || n_valid < 1 || n_test < 1) throw std::invalid_argument("split counts must be >= 1");
}

Eigen::MatrixXd latin_hypercube(const std::vector<std::pair<double, double>>& bounds, Eigen::Index n,
                                std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latin_hypercube: n must be >= 1");
  for (const auto& [lo, hi] : bounds)
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("latin_hypercube: degenerate bounds");
  const auto dim = static_cast<Eigen::Index>(bounds.size());
  Eigen::MatrixXd samples(dim, n);
  Rng rng(seed);
  std::vector<Eigen::Index> strata(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < dim; ++d) {
    for (Eigen::Index i = 0; i < n; ++i) strata[static_cast<std::size_t>(i)] = i;
    shuffle(strata, rng);
    const auto [lo, hi] = bounds[static_cast<std::size_t>(d)];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + uniform01(rng)) /
                       static_cast<double>(n);
      samples(d, i) = lo + (hi - lo) * u;
    }
  }
  return samples;
}

ParameterSamples lhs_sample(const ParameterDesign& design) {
  design.validate();
  ParameterSamples s;
  s.train = latin_hypercube(design.bounds, design.n_train, derive_seed(design.seed, 0));
  s.valid = latin_hypercube(design.bounds, design.n_valid, derive_seed(design.seed, 1));
  s.test = latin_hypercube(design.bounds, design.n_test, derive_seed(design.seed, 2));

  std::set<std::vector<double>> seen;
  for (const Eigen::MatrixXd* m : {&s.train, &s.valid, &s.test})
    for (Eigen::Index j = 0; j < m->cols(); ++j) {
      std::vector<double> key(m->col(j).data(), m->col(j).data() + m->rows());
      if (!seen.insert(key).second) throw NumericalError("Latin hypercube splits overlap");
    }
  return s;
}

}  // namespace plando
