#include "plando/kernels.hpp"

#include "support.hpp"

#include <doctest.h>

#include <limits>

using namespace plando;

namespace {

std::vector<KernelSpec> all_specs() {
  return {KernelSpec::linear(), KernelSpec::quadratic(), KernelSpec::polynomial(3, 0.5), KernelSpec::gaussian(0.7)};
}

}  // namespace

TEST_CASE("kernel scalar values") {
  CHECK(eval(KernelSpec::linear(), Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) == 11.0);
  CHECK(eval(KernelSpec::quadratic(1.0), Eigen::Vector2d(0, 0), Eigen::Vector2d(7, -3)) == 1.0);
  CHECK(eval(KernelSpec::gaussian(1.0), Eigen::Vector2d(0.3, 2), Eigen::Vector2d(0.3, 2)) == 1.0);
  // (1 + 11)^2
  CHECK(eval(KernelSpec::quadratic(1.0), Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) == 144.0);
  // exp(-|(1,1)|^2 / (2 * 0.5^2)) = exp(-4)
  CHECK(eval(KernelSpec::gaussian(0.5), Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)) ==
        doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
}

TEST_CASE("kernel matrix examples") {
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  CHECK(eval_matrix(KernelSpec::linear(), I, I) == I);

  Eigen::MatrixXd A(2, 1), B(2, 1);
  A << 1, 0;
  B << 2, 0;
  const Eigen::MatrixXd K = eval_matrix(KernelSpec::polynomial(2, 0.0), A, B);
  REQUIRE(K.rows() == 1);
  CHECK(K(0, 0) == 4.0);
}

TEST_CASE("kernel errors") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eval(KernelSpec::linear(), Eigen::VectorXd(Eigen::Vector2d(1, 2)), Eigen::VectorXd(Eigen::Vector3d(1, 2, 3))), std::invalid_argument);
  CHECK_THROWS_AS(eval(KernelSpec::linear(), Eigen::Vector2d(nan, 2), Eigen::Vector2d(1, 2)), std::invalid_argument);
  CHECK_THROWS_AS(eval_matrix(KernelSpec::linear(), Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Ones(3, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::polynomial(0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), std::invalid_argument);
}

TEST_CASE("kernel spec parsing round-trips") {
  for (const auto& s : all_specs()) CHECK(parse_kernel_spec(format_kernel_spec(s)) == s);
  CHECK(parse_kernel_spec("quadratic") == KernelSpec::quadratic());
  CHECK(parse_kernel_spec("poly:3:2") == KernelSpec::polynomial(3, 2.0));
  CHECK(parse_kernel_spec("gaussian:0.25") == KernelSpec::gaussian(0.25));
  CHECK_THROWS_AS(parse_kernel_spec("cubic"), std::invalid_argument);
}

TEST_CASE("property: symmetry, PSD and batch agreement") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = testing::random_int(rng, 1, 6);
    const Eigen::Index p = testing::random_int(rng, 1, 20);
    const Eigen::MatrixXd A = testing::random_matrix(rng, n, p, -2.0, 2.0);
    for (const auto& spec : all_specs()) {
      CAPTURE(format_kernel_spec(spec));
      const Eigen::MatrixXd K = eval_matrix(spec, A, A);
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          const double kij = eval(spec, A.col(i), A.col(j));
          const double kji = eval(spec, A.col(j), A.col(i));
          if (spec.kind == KernelKind::Gaussian)
            CHECK(std::abs(kij - kji) <= 1e-14);
          else
            CHECK(kij == kji);
          CHECK(std::abs(K(i, j) - kij) <= 1e-12 * std::max(1.0, std::abs(kij)));
        }
      }
      const Eigen::MatrixXd Ks = 0.5 * (K + K.transpose());
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ks).eigenvalues().minCoeff();
      const double norm2 = Eigen::JacobiSVD<Eigen::MatrixXd>(K).singularValues()(0);
      CHECK(lmin >= -1e-10 * norm2);
    }
  }
}

TEST_CASE("identical specs give bit-identical values") {
  Rng rng(3);
  const Eigen::MatrixXd A = testing::random_matrix(rng, 4, 9);
  for (const auto& spec : all_specs()) {
    const KernelSpec copy = spec;
    CHECK((eval_matrix(spec, A, A).array() == eval_matrix(copy, A, A).array()).all());
  }
}

TEST_CASE("kernels work on float scalars") {
  const Eigen::Vector2f a(1.0f, 2.0f), b(3.0f, 4.0f);
  const float v = eval(KernelSpec::quadratic(), a, b);
  CHECK(v == 144.0f);
  const Eigen::MatrixXf K = eval_matrix(KernelSpec::linear(), Eigen::Matrix2f::Identity(), Eigen::Matrix2f::Identity());
  CHECK(K.isIdentity());
}
