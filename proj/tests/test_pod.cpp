#include "plando/errors.hpp"
#include "plando/pod.hpp"
#include "plando/systems.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace plando;

TEST_CASE("pod rank selection") {
  SUBCASE("rank-1 snapshots") {
    const Eigen::MatrixXd S = Eigen::Vector3d(1, -2, 0.5) * Eigen::RowVector4d(1, 3, -2, 0.1);
    for (double th : {0.5, 0.9999, 1.0}) {
      const PodBasis b = compute_pod(S, th);
      CHECK(b.rank() == 1);
      CHECK(b.captured_energy() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("orthogonal columns with norms 2 and 1") {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 2);
    S(0, 0) = 2.0;
    S(2, 1) = 1.0;
    const PodBasis b = compute_pod(S, 0.79);
    CHECK(b.rank() == 1);  // 4 / 5 = 0.8
    CHECK(b.singular_values(0) == doctest::Approx(2.0));
    CHECK(b.singular_values(1) == doctest::Approx(1.0));
    CHECK(compute_pod(S, 0.81).rank() == 2);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(compute_pod(Eigen::MatrixXd::Zero(4, 3)), NumericalError);
    CHECK_THROWS_AS(compute_pod(Eigen::MatrixXd::Ones(4, 3), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_pod(Eigen::MatrixXd::Ones(4, 3), 1.5), std::invalid_argument);
    CHECK_THROWS_AS(compute_pod_rank(Eigen::MatrixXd::Ones(4, 3), 0), std::invalid_argument);
  }
}

TEST_CASE("pod projection examples") {
  Rng rng(17);
  const Eigen::MatrixXd S = testing::random_matrix(rng, 6, 3);
  const PodBasis b = compute_pod_rank(S, 3);
  REQUIRE(b.rank() == 3);

  const Eigen::VectorXd in_span = b.phi * Eigen::Vector3d(0.3, -1.0, 2.0);
  CHECK((reconstruct(b, project(b, in_span)) - in_span).norm() <= 1e-10);

  // orthogonal complement of the basis
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(6, 6) - b.phi * b.phi.transpose();
  const Eigen::VectorXd perp = P * testing::random_vector(rng, 6);
  CHECK(project(b, perp).norm() <= 1e-12);

  CHECK(reconstruct(b, Eigen::Vector3d::Zero()).isZero(0.0));
  CHECK((reconstruct(b, Eigen::Vector3d::UnitX()) - b.phi.col(0)).norm() == 0.0);
  const Eigen::VectorXd xr = testing::random_vector(rng, 3);
  CHECK((project(b, reconstruct(b, xr)) - xr).norm() <= 1e-10);

  const PodBasis full = compute_pod_rank(testing::random_matrix(rng, 5, 8), 5);
  const Eigen::VectorXd x = testing::random_vector(rng, 5);
  CHECK((reconstruct(full, project(full, x)) - x).norm() <= 1e-10);

  CHECK_THROWS_AS(project(b, Eigen::VectorXd::Zero(5)), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct(b, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("property: orthonormality and Eckart-Young optimality") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index rows = testing::random_int(rng, 2, 50);
    const Eigen::Index cols = testing::random_int(rng, 1, 20);
    // decaying spectrum so thresholds bite
    const Eigen::Index r = std::min(rows, cols);
    Eigen::VectorXd s(r);
    for (Eigen::Index i = 0; i < r; ++i) s(i) = std::pow(10.0, -0.5 * static_cast<double>(i)) * (1.0 + plando::uniform01(rng));
    const Eigen::MatrixXd U = testing::random_matrix(rng, rows, r).householderQr().householderQ() *
                              Eigen::MatrixXd::Identity(rows, r);
    const Eigen::MatrixXd V = testing::random_matrix(rng, cols, r).householderQr().householderQ() *
                              Eigen::MatrixXd::Identity(cols, r);
    const Eigen::MatrixXd S = U * s.asDiagonal() * V.transpose();
    const double th = 1.0 - std::pow(10.0, -testing::random_int(rng, 1, 6));
    const PodBasis b = compute_pod(S, th);
    CAPTURE(trial);

    const Eigen::Index n = b.rank();
    CHECK((b.phi.transpose() * b.phi - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-10);
    for (Eigen::Index i = 1; i < b.singular_values.size(); ++i)
      CHECK(b.singular_values(i) <= b.singular_values(i - 1));

    // minimal rank reaching the threshold, from a Jacobi SVD oracle
    const Eigen::VectorXd sig = Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues();
    const double total = sig.squaredNorm();
    CHECK(sig.head(n).squaredNorm() >= th * total * (1.0 - 1e-12));
    if (n > 1) CHECK(sig.head(n - 1).squaredNorm() < th * total);

    // Eckart-Young: projection error equals the discarded singular values,
    // which is also the oracle's best rank-n error
    const double err = (S - b.phi * (b.phi.transpose() * S)).norm();
    const double tail = std::sqrt(sig.tail(sig.size() - n).squaredNorm());
    CHECK(std::abs(err - tail) <= 1e-8 * S.norm());
    CHECK(std::abs(b.truncation_error() - tail) <= 1e-8 * S.norm());

    // projection is a contraction
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd x = testing::random_vector(rng, rows);
      CHECK(reconstruct(b, project(b, x)).norm() <= x.norm() * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("pod is deterministic and sign-stable") {
  Rng rng(5);
  const Eigen::MatrixXd S = testing::random_matrix(rng, 30, 12);
  const PodBasis a = compute_pod(S, 0.99);
  const PodBasis b = compute_pod(S, 0.99);
  CHECK((a.phi.array() == b.phi.array()).all());
  const Eigen::MatrixXd Pa = a.phi * a.phi.transpose();
  const Eigen::MatrixXd Pb = b.phi * b.phi.transpose();
  CHECK((Pa.array() == Pb.array()).all());
  for (Eigen::Index j = 0; j < a.rank(); ++j) {
    Eigen::Index i = 0;
    a.phi.col(j).cwiseAbs().maxCoeff(&i);
    CHECK(a.phi(i, j) > 0.0);
  }
  // flipping the data's sign leaves the basis unchanged
  const PodBasis c = compute_pod(-S, 0.99);
  CHECK((c.phi - a.phi).norm() <= 1e-12);
}

TEST_CASE("heat snapshots at t = 1 need few bases") {
  const Eigen::MatrixXd mus = latin_hypercube({{0.5, 1.0}}, 40, 3);
  HeatParams p;
  Eigen::MatrixXd S(p.state_dim(), mus.cols());
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 1.0);
  for (Eigen::Index i = 0; i < mus.cols(); ++i) {
    p.diffusivity = mus(0, i);
    S.col(i) = heat_states(p, t).col(0);
  }
  CHECK(compute_pod(S, 0.9999).rank() <= 6);
}
