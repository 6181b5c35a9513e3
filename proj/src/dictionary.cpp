#include "plando/dictionary.hpp"

#include "plando/errors.hpp"
#include "plando/random.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace plando {
namespace {

// Beyond this the triangular solves lose all significant digits.
constexpr double kMaxConditionEstimate = 1e16;

double condition_estimate(const Eigen::Ref<const Eigen::MatrixXd>& chol) {
  const Eigen::VectorXd d = chol.diagonal().cwiseAbs();
  const double lo = d.minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = d.maxCoeff() / lo;
  return ratio * ratio;
}

[[noreturn]] void throw_ill_conditioned(double cond, const char* where) {
  std::ostringstream msg;
  msg << where << ": dictionary kernel matrix is ill-conditioned (condition estimate " << cond
      << ")";
  throw IllConditionedError(msg.str(), cond);
}

struct Residual {
  double delta;
  double diag;             // k(x_c, x_c)
  Eigen::VectorXd row;     // L^{-1} k~
};

Residual residual(const KernelSpec& kernel, const Eigen::Ref<const Eigen::MatrixXd>& cols,
                  const Eigen::Ref<const Eigen::MatrixXd>& chol, const Eigen::VectorXd& x_c) {
  const Eigen::VectorXd k_tilde = eval_matrix(kernel, cols, x_c);
  Residual r;
  r.diag = eval(kernel, x_c, x_c);
  r.row = chol.triangularView<Eigen::Lower>().solve(k_tilde);
  // k~^T (L L^T)^{-1} k~ = |L^{-1} k~|^2
  r.delta = r.diag - r.row.squaredNorm();
  return r;
}

}  // namespace

SparseDictionary SparseDictionary::from_columns(const KernelSpec& kernel,
                                                const Eigen::MatrixXd& columns, double jitter) {
  kernel.validate();
  if (columns.cols() < 1 || columns.rows() < 1)
    throw std::invalid_argument("dictionary needs at least one column");
  if (!(jitter >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
  SparseDictionary dict;
  dict.kernel = kernel;
  dict.columns = columns;
  dict.jitter = jitter;
  Eigen::MatrixXd K = eval_matrix(kernel, columns, columns);
  K.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw_ill_conditioned(std::numeric_limits<double>::infinity(), "from_columns");
  dict.chol = llt.matrixL();
  const double cond = condition_estimate(dict.chol);
  if (cond > kMaxConditionEstimate) throw_ill_conditioned(cond, "from_columns");
  return dict;
}

AldResult ald_delta(const SparseDictionary& dict, const Eigen::VectorXd& x_c) {
  if (x_c.size() != dict.state_dim())
    throw std::invalid_argument("ald_delta: candidate has dimension " + std::to_string(x_c.size()) +
                                ", dictionary has " + std::to_string(dict.state_dim()));
  const Residual r = residual(dict.kernel, dict.columns, dict.chol, x_c);
  const double tol = 1e-10 * std::abs(r.diag);
  if (r.delta < -std::max(tol, 1e-6 * std::abs(r.diag)))
    throw_ill_conditioned(condition_estimate(dict.chol), "ald_delta");
  AldResult out;
  out.delta = r.delta;
  out.pi = dict.chol.transpose().triangularView<Eigen::Upper>().solve(r.row);
  return out;
}

double default_jitter(const KernelSpec& kernel, const Eigen::MatrixXd& X, double nu) {
  double max_diag = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    max_diag = std::max(max_diag, std::abs(eval(kernel, X.col(j), X.col(j))));
  // The jitter biases delta upwards by roughly jitter * |pi|^2, so it has to
  // stay well below nu or badly scaled data never pass the test.
  return std::min(1e-10 * max_diag, 1e-2 * nu);
}

SparseDictionary build_dictionary(const KernelSpec& kernel, const Eigen::MatrixXd& X, double nu,
                                  std::uint64_t seed, std::optional<double> jitter) {
  kernel.validate();
  if (X.cols() < 1 || X.rows() < 1) throw std::invalid_argument("build_dictionary: empty snapshot matrix");
  if (!X.allFinite()) throw std::invalid_argument("build_dictionary: snapshot matrix has non-finite entries");
  if (!(nu > 0.0)) throw std::invalid_argument("build_dictionary: threshold nu must be > 0");

  const double jit = jitter.value_or(default_jitter(kernel, X, nu));
  if (!(jit >= 0.0)) throw std::invalid_argument("build_dictionary: jitter must be >= 0");

  const Eigen::Index n_t = X.cols();
  const std::vector<std::size_t> order = permutation(static_cast<std::size_t>(n_t), seed);

  // Grown in place; only the leading m columns / m x m block are live.
  Eigen::MatrixXd cols(X.rows(), n_t);
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n_t, n_t);
  std::vector<Eigen::Index> sources;

  const auto first = static_cast<Eigen::Index>(order[0]);
  const double d0 = eval(kernel, X.col(first), X.col(first)) + jit;
  if (!(d0 > 0.0)) throw_ill_conditioned(std::numeric_limits<double>::infinity(), "build_dictionary");
  cols.col(0) = X.col(first);
  chol(0, 0) = std::sqrt(d0);
  sources.push_back(first);
  Eigen::Index m = 1;

  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(order[i]);
    const Eigen::VectorXd x_c = X.col(idx);
    Residual r = residual(kernel, cols.leftCols(m), chol.topLeftCorner(m, m), x_c);
    if (r.delta < -1e-6 * std::abs(r.diag))
      throw_ill_conditioned(condition_estimate(chol.topLeftCorner(m, m)), "build_dictionary");
    const double delta = std::max(r.delta, 0.0);
    if (delta <= nu) continue;

    cols.col(m) = x_c;
    chol.row(m).head(m) = r.row.transpose();
    chol(m, m) = std::sqrt(delta + jit);
    sources.push_back(idx);
    ++m;
    const double cond = condition_estimate(chol.topLeftCorner(m, m));
    if (cond > kMaxConditionEstimate) throw_ill_conditioned(cond, "build_dictionary");
  }

  SparseDictionary dict;
  dict.kernel = kernel;
  dict.columns = cols.leftCols(m);
  dict.chol = chol.topLeftCorner(m, m);
  dict.threshold = nu;
  dict.jitter = jit;
  dict.seed = seed;
  dict.source_indices = std::move(sources);
  return dict;
}

}  // namespace plando
