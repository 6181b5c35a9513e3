#pragma once

#include "plando/lando.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace plando {

/// `count` equidistant points from t0 to t_end inclusive.
Eigen::VectorXd uniform_grid(double t0, double t_end, Eigen::Index count);

// ---------------------------------------------------------------------------
// Lotka-Volterra: x1' = alpha x1 - beta x1 x2, x2' = delta x1 x2 - gamma x2

struct LotkaVolterraParams {
  double alpha = 0.1;
  double beta = 0.002;
  double gamma = 0.2;
  double delta = 0.0025;

  void validate() const;
};

enum class DerivativeSource { Exact, FiniteDifference };

Eigen::Vector2d lotka_volterra_rhs(const LotkaVolterraParams& p, const Eigen::Vector2d& x);

/// First integral delta x1 - gamma ln x1 + beta x2 - alpha ln x2.
double lotka_volterra_invariant(const LotkaVolterraParams& p, const Eigen::Vector2d& x);

struct OdeTolerances {
  double abs = 1e-9;
  double rel = 1e-9;
};

/// Reference states (2 x len(t_grid)) from adaptive Dormand-Prince,
/// starting from x0 at t = 0.
Eigen::MatrixXd lotka_volterra_states(const LotkaVolterraParams& p, const Eigen::Vector2d& x0,
                                      const Eigen::VectorXd& t_grid, OdeTolerances tol = {});

/// Continuous snapshot set; targets are the exact right-hand side at the
/// solution states unless finite differences are requested.
SnapshotSet solve_lotka_volterra(const LotkaVolterraParams& p, const Eigen::Vector2d& x0,
                                 const Eigen::VectorXd& t_grid,
                                 DerivativeSource targets = DerivativeSource::Exact,
                                 OdeTolerances tol = {});

// ---------------------------------------------------------------------------
// Heat equation u_t = D (u_xx + u_yy) on (0, L)^2, zero Dirichlet boundary.

struct HeatParams {
  double diffusivity = 0.75;
  double alpha_ic = 0.6;
  Eigen::Index nx = 32;  // interior points per direction
  Eigen::Index ny = 32;
  double dt = 0.01;      // Crank-Nicolson step
  double length = 5.0;

  void validate() const;
  Eigen::Index state_dim() const { return nx * ny; }
  double hx() const { return length / static_cast<double>(nx + 1); }
  double hy() const { return length / static_cast<double>(ny + 1); }
};

/// Interior point coordinates, row-major (index = j * nx + i).
std::pair<Eigen::VectorXd, Eigen::VectorXd> heat_grid(const HeatParams& p);

/// tanh(a sin(0.2 pi x) / (1 - a cos(0.2 pi x))) times the same in y.
Eigen::VectorXd heat_initial_condition(const HeatParams& p);

/// Crank-Nicolson states at every time in t_grid (multiples of p.dt).
Eigen::MatrixXd heat_states(const HeatParams& p, const Eigen::VectorXd& t_grid,
                            const std::optional<Eigen::VectorXd>& initial = std::nullopt);

SnapshotSet solve_heat(const HeatParams& p, const Eigen::VectorXd& t_grid,
                       const std::optional<Eigen::VectorXd>& initial = std::nullopt);

// ---------------------------------------------------------------------------
// Allen-Cahn u_t = lambda u_xx - epsilon (u^3 - u) on (-1, 1), u(+-1) = -1.

struct AllenCahnParams {
  double lambda = 5e-4;
  double epsilon = 2.0;
  Eigen::Index nx = 250;  // grid points including both boundaries
  double dt = 1e-4;
  double boundary_value = -1.0;

  void validate() const;
  Eigen::Index state_dim() const { return nx - 2; }
  double h() const { return 2.0 / static_cast<double>(nx - 1); }
};

/// Interior coordinates.
Eigen::VectorXd allen_cahn_grid(const AllenCahnParams& p);

/// x^2 cos(pi x) at the interior points.
Eigen::VectorXd allen_cahn_initial_condition(const AllenCahnParams& p);

/// Semi-implicit states: diffusion implicit, reaction explicit.
Eigen::MatrixXd allen_cahn_states(const AllenCahnParams& p, const Eigen::VectorXd& t_grid,
                                  const std::optional<Eigen::VectorXd>& initial = std::nullopt);

SnapshotSet solve_allen_cahn(const AllenCahnParams& p, const Eigen::VectorXd& t_grid,
                             const std::optional<Eigen::VectorXd>& initial = std::nullopt);

// ---------------------------------------------------------------------------
// Latin hypercube design

struct ParameterDesign {
  std::vector<std::pair<double, double>> bounds;
  Eigen::Index n_train = 1;
  Eigen::Index n_valid = 1;
  Eigen::Index n_test = 1;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(bounds.size()); }
  void validate() const;
};

/// Parameter samples, one column per instance.
struct ParameterSamples {
  Eigen::MatrixXd train;
  Eigen::MatrixXd valid;
  Eigen::MatrixXd test;
};

/// n Latin hypercube samples: in every dimension each of the n equal-width
/// strata holds exactly one sample.
Eigen::MatrixXd latin_hypercube(const std::vector<std::pair<double, double>>& bounds, Eigen::Index n,
                                std::uint64_t seed);

/// Independent Latin hypercubes for the three splits.
ParameterSamples lhs_sample(const ParameterDesign& design);

}  // namespace plando
