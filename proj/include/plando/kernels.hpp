#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace plando {

enum class KernelKind { Linear, Polynomial, Gaussian };

/// Kernel function k(a, b) on state vectors.
///
///   Linear      <a, b>
///   Polynomial  (offset + <a, b>)^degree
///   Gaussian    exp(-|a - b|^2 / (2 lengthscale^2))
///
/// Fields not used by `kind` are ignored, but still serialized.
struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  int degree = 2;
  double offset = 1.0;
  double lengthscale = 1.0;

  static KernelSpec linear() { return {KernelKind::Linear, 2, 1.0, 1.0}; }
  static KernelSpec polynomial(int degree, double offset = 1.0) {
    KernelSpec s{KernelKind::Polynomial, degree, offset, 1.0};
    s.validate();
    return s;
  }
  static KernelSpec quadratic(double offset = 1.0) { return polynomial(2, offset); }
  static KernelSpec gaussian(double lengthscale = 1.0) {
    KernelSpec s{KernelKind::Gaussian, 2, 1.0, lengthscale};
    s.validate();
    return s;
  }

  void validate() const {
    if (kind == KernelKind::Polynomial) {
      if (degree < 1) throw std::invalid_argument("polynomial kernel degree must be >= 1");
      if (!(offset >= 0.0) || !std::isfinite(offset))
        throw std::invalid_argument("polynomial kernel offset must be finite and >= 0");
    }
    if (kind == KernelKind::Gaussian && !(lengthscale > 0.0 && std::isfinite(lengthscale)))
      throw std::invalid_argument("gaussian kernel lengthscale must be > 0");
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Parses the CLI form: "linear", "quadratic", "poly:<degree>[:<offset>]",
/// "gaussian[:<lengthscale>]".
KernelSpec parse_kernel_spec(const std::string& text);
std::string format_kernel_spec(const KernelSpec& spec);

namespace detail {

template <typename Scalar>
Scalar integer_power(Scalar base, int exponent) {
  Scalar result(1);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

template <typename Scalar>
Scalar apply_inner(const KernelSpec& spec, Scalar inner) {
  if (spec.kind == KernelKind::Polynomial)
    return integer_power(Scalar(spec.offset) + inner, spec.degree);
  return inner;
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite entries");
}

}  // namespace detail

/// Scalar kernel evaluation k(a, b).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar eval(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& a,
                               const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size() || a.size() < 1)
    throw std::invalid_argument("kernel eval: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  detail::require_finite(a, "kernel argument a");
  detail::require_finite(b, "kernel argument b");
  if (spec.kind == KernelKind::Gaussian) {
    const Scalar sq = (a.derived().reshaped() - b.derived().reshaped()).squaredNorm();
    return std::exp(-sq / (Scalar(2) * Scalar(spec.lengthscale) * Scalar(spec.lengthscale)));
  }
  return detail::apply_inner(spec, a.derived().reshaped().dot(b.derived().reshaped()));
}

/// Batched kernel matrix: entry (i, j) = k(A.col(i), B.col(j)).
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_matrix(
    const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& A,
    const Eigen::MatrixBase<DerivedB>& B) {
  using Scalar = typename DerivedA::Scalar;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (A.rows() != B.rows())
    throw std::invalid_argument("kernel eval_matrix: row dimension mismatch (" +
                                std::to_string(A.rows()) + " vs " + std::to_string(B.rows()) + ")");
  detail::require_finite(A, "kernel matrix argument A");
  detail::require_finite(B, "kernel matrix argument B");

  Result K(A.cols(), B.cols());
  if (spec.kind == KernelKind::Gaussian) {
    const Scalar denom = Scalar(2) * Scalar(spec.lengthscale) * Scalar(spec.lengthscale);
    for (Eigen::Index j = 0; j < B.cols(); ++j)
      for (Eigen::Index i = 0; i < A.cols(); ++i)
        K(i, j) = std::exp(-(A.col(i) - B.col(j)).squaredNorm() / denom);
    return K;
  }
  K.noalias() = A.transpose() * B;
  if (spec.kind == KernelKind::Polynomial)
    K = K.unaryExpr([&spec](Scalar v) { return detail::apply_inner(spec, v); });
  return K;
}

}  // namespace plando
