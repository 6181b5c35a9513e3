#include "plando/pod.hpp"

#include "plando/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plando {
namespace {

struct Svd {
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;
};

Svd thin_svd(const Eigen::MatrixXd& S) {
  if (S.rows() < 1 || S.cols() < 1) throw std::invalid_argument("POD: empty snapshot matrix");
  if (!S.allFinite()) throw std::invalid_argument("POD: snapshot matrix has non-finite entries");
  if (S.isZero(0.0)) throw NumericalError("zero snapshot matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU);
  Svd out{svd.matrixU(), svd.singularValues()};
  // Fix the sign: largest-magnitude entry of every column positive.
  for (Eigen::Index j = 0; j < out.U.cols(); ++j) {
    Eigen::Index i_max = 0;
    out.U.col(j).cwiseAbs().maxCoeff(&i_max);
    if (out.U(i_max, j) < 0.0) out.U.col(j) *= -1.0;
  }
  return out;
}

PodBasis truncate(Svd svd, Eigen::Index rank, double threshold) {
  PodBasis basis;
  basis.phi = svd.U.leftCols(rank);
  basis.singular_values = std::move(svd.sigma);
  basis.energy_threshold = threshold;
  return basis;
}

}  // namespace

Eigen::VectorXd PodBasis::cumulative_energy() const {
  Eigen::VectorXd energy(singular_values.size());
  double running = 0.0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
    running += singular_values(i) * singular_values(i);
    energy(i) = running;
  }
  return running > 0.0 ? Eigen::VectorXd(energy / running) : energy;
}

double PodBasis::captured_energy() const {
  if (rank() == 0) return 0.0;
  return cumulative_energy()(rank() - 1);
}

double PodBasis::truncation_error() const {
  return std::sqrt(singular_values.tail(singular_values.size() - rank()).squaredNorm());
}

PodBasis compute_pod(const Eigen::MatrixXd& S, double energy_threshold) {
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0))
    throw std::invalid_argument("POD energy threshold must lie in (0, 1]");
  Svd svd = thin_svd(S);
  const Eigen::VectorXd sq = svd.sigma.array().square();
  const double total = sq.sum();
  double running = 0.0;
  Eigen::Index rank = svd.sigma.size();
  for (Eigen::Index i = 0; i < sq.size(); ++i) {
    running += sq(i);
    if (running >= energy_threshold * total) {
      rank = i + 1;
      break;
    }
  }
  return truncate(std::move(svd), rank, energy_threshold);
}

PodBasis compute_pod_rank(const Eigen::MatrixXd& S, Eigen::Index rank) {
  if (rank < 1) throw std::invalid_argument("POD rank must be >= 1");
  Svd svd = thin_svd(S);
  const Eigen::Index n = std::min<Eigen::Index>(rank, svd.sigma.size());
  return truncate(std::move(svd), n, 0.0);
}

Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.state_dim())
    throw std::invalid_argument("POD project: state has dimension " + std::to_string(x.size()) +
                                ", basis has " + std::to_string(basis.state_dim()));
  return basis.phi.transpose() * x;
}

Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& xr) {
  if (xr.size() != basis.rank())
    throw std::invalid_argument("POD reconstruct: reduced vector has dimension " +
                                std::to_string(xr.size()) + ", basis rank is " +
                                std::to_string(basis.rank()));
  return basis.phi * xr;
}

Eigen::MatrixXd project_columns(const PodBasis& basis, const Eigen::MatrixXd& X) {
  if (X.rows() != basis.state_dim()) throw std::invalid_argument("POD project: row dimension mismatch");
  return basis.phi.transpose() * X;
}

Eigen::MatrixXd reconstruct_columns(const PodBasis& basis, const Eigen::MatrixXd& Xr) {
  if (Xr.rows() != basis.rank()) throw std::invalid_argument("POD reconstruct: row dimension mismatch");
  return basis.phi * Xr;
}

}  // namespace plando
