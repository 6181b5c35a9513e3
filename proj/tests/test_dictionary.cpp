#include "plando/dictionary.hpp"
#include "plando/errors.hpp"
#include "plando/systems.hpp"

#include "support.hpp"

#include <doctest.h>

#include <limits>
#include <set>

using namespace plando;

TEST_CASE("ald residual examples") {
  SUBCASE("candidate equal to a dictionary column") {
    Rng rng(5);
    const Eigen::MatrixXd cols = testing::random_matrix(rng, 4, 3);
    const auto dict = SparseDictionary::from_columns(KernelSpec::quadratic(), cols);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const AldResult r = ald_delta(dict, cols.col(j));
      CHECK(std::abs(r.delta) <= 1e-10);
      CHECK((r.pi - Eigen::VectorXd::Unit(3, j)).norm() <= 1e-8);
    }
  }
  SUBCASE("orthogonal candidate") {
    const auto dict = SparseDictionary::from_columns(KernelSpec::linear(), Eigen::Vector2d(1, 0));
    const AldResult r = ald_delta(dict, Eigen::Vector2d(0, 1));
    CHECK(r.delta == 1.0);
    REQUIRE(r.pi.size() == 1);
    CHECK(r.pi(0) == 0.0);
  }
  SUBCASE("candidate in the span") {
    const auto dict = SparseDictionary::from_columns(KernelSpec::linear(), Eigen::Matrix2d::Identity());
    const AldResult r = ald_delta(dict, Eigen::Vector2d(3, 4));
    // brute-force least squares: min |x - X~ pi| over pi
    const Eigen::VectorXd pi_ls = Eigen::Matrix2d::Identity().colPivHouseholderQr().solve(Eigen::Vector2d(3, 4));
    CHECK(std::abs(r.delta) <= 1e-12);
    CHECK((r.pi - pi_ls).norm() <= 1e-12);
  }
  SUBCASE("dimension mismatch") {
    const auto dict = SparseDictionary::from_columns(KernelSpec::linear(), Eigen::Matrix2d::Identity());
    CHECK_THROWS_AS(ald_delta(dict, Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
  }
}

TEST_CASE("dictionary build examples") {
  SUBCASE("identical columns") {
    const Eigen::MatrixXd X = Eigen::Vector3d(0.3, -1.0, 2.0).replicate(1, 25);
    for (double nu : {1e-12, 1e-6, 1.0}) CHECK(build_dictionary(KernelSpec::quadratic(), X, nu, 7).size() == 1);
  }
  SUBCASE("linearly independent columns, linear kernel") {
    Rng rng(9);
    for (Eigen::Index d : {1, 2, 4, 7}) {
      const Eigen::MatrixXd X = testing::random_matrix(rng, d, d) + 3.0 * Eigen::MatrixXd::Identity(d, d);
      CHECK(build_dictionary(KernelSpec::linear(), X, 1e-12, 1).size() == d);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_dictionary(KernelSpec::linear(), Eigen::MatrixXd(3, 0), 1e-6, 0), std::invalid_argument);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 3);
    X(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(build_dictionary(KernelSpec::linear(), X, 1e-6, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_dictionary(KernelSpec::linear(), Eigen::MatrixXd::Ones(2, 3), 0.0, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("Lotka-Volterra trajectory gives a small dictionary") {
  LotkaVolterraParams p;
  p.alpha = 0.05;
  const Eigen::VectorXd grid = uniform_grid(0.0, 400.0, 601);
  const Eigen::MatrixXd X = lotka_volterra_states(p, Eigen::Vector2d(80, 20), grid);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto dict = build_dictionary(KernelSpec::quadratic(), X, 1e-6, seed);
    CAPTURE(seed);
    CHECK(dict.size() >= 3);
    CHECK(dict.size() <= 12);
  }
}

TEST_CASE("property: incremental Cholesky agrees with dense oracles") {
  Rng rng(21);
  const std::vector<KernelSpec> specs = {KernelSpec::linear(), KernelSpec::quadratic(), KernelSpec::gaussian(1.5)};
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = testing::random_int(rng, 2, 5);
    const Eigen::Index nt = testing::random_int(rng, 5, 40);
    // Low-rank trajectories plus a few duplicated columns, so some candidates are rejected.
    const Eigen::Index r = testing::random_int(rng, 1, n);
    Eigen::MatrixXd X = testing::random_matrix(rng, n, r) * testing::random_matrix(rng, r, nt);
    for (int k = 0; k < 3; ++k) X.col(testing::random_int(rng, 0, nt - 1)) = X.col(testing::random_int(rng, 0, nt - 1));
    const KernelSpec& spec = specs[static_cast<std::size_t>(trial) % specs.size()];
    const double nu = 1e-6;
    const auto dict = build_dictionary(spec, X, nu, static_cast<std::uint64_t>(trial));
    CAPTURE(trial);

    const Eigen::Index m = dict.size();
    REQUIRE(m >= 1);
    CHECK(m <= nt);
    // chol is the lower factor of k(X~, X~) + jitter I
    Eigen::MatrixXd K = eval_matrix(spec, dict.columns, dict.columns);
    K.diagonal().array() += dict.jitter;
    const Eigen::MatrixXd L = dict.chol;
    CHECK(L.isLowerTriangular(0.0));
    CHECK((L * L.transpose() - K).norm() <= 1e-8 * K.norm());

    // ALD residuals against a dense LU solve
    for (Eigen::Index j = 0; j < nt; ++j) {
      const Eigen::VectorXd x = X.col(j);
      const double oracle = testing::dense_ald_delta(K - dict.jitter * Eigen::MatrixXd::Identity(m, m),
                                                     eval_matrix(spec, dict.columns, x), eval(spec, x, x), dict.jitter);
      const double delta = ald_delta(dict, x).delta;
      CHECK(std::abs(delta - oracle) <= 1e-8 * std::max(1.0, eval(spec, x, x)));
    }
    // every rejected column is represented to within nu (up to the jitter bias)
    std::set<Eigen::Index> accepted(dict.source_indices.begin(), dict.source_indices.end());
    for (Eigen::Index j = 0; j < nt; ++j) {
      if (accepted.count(j)) continue;
      CHECK(ald_delta(dict, X.col(j)).delta <= nu + 1e-8);
    }
    // accepted columns appear in permutation order
    for (std::size_t k = 0; k < dict.source_indices.size(); ++k)
      CHECK((dict.columns.col(static_cast<Eigen::Index>(k)) - X.col(dict.source_indices[k])).norm() == 0.0);
  }
}

TEST_CASE("property: duplicates of accepted columns have zero residual") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X = testing::random_matrix(rng, 3, 6);
    const auto dict = build_dictionary(KernelSpec::quadratic(), X, 1e-8, static_cast<std::uint64_t>(trial), 0.0);
    for (Eigen::Index k = 0; k < dict.size(); ++k) CHECK(std::abs(ald_delta(dict, dict.columns.col(k)).delta) <= 1e-8);
  }
}

TEST_CASE("dictionary build is deterministic in the seed") {
  Rng rng(8);
  const Eigen::MatrixXd X = testing::random_matrix(rng, 3, 50);
  const auto a = build_dictionary(KernelSpec::quadratic(), X, 1e-3, 42);
  const auto b = build_dictionary(KernelSpec::quadratic(), X, 1e-3, 42);
  CHECK(a.source_indices == b.source_indices);
  CHECK((a.columns.array() == b.columns.array()).all());
  CHECK((a.chol.array() == b.chol.array()).all());
  const auto c = build_dictionary(KernelSpec::quadratic(), X, 1e-3, 43);
  CHECK(c.source_indices != a.source_indices);
}

TEST_CASE("default jitter") {
  const Eigen::MatrixXd X = Eigen::Vector2d(3, 4);  // k(x, x) = 25 for the linear kernel
  CHECK(default_jitter(KernelSpec::linear(), X, 1.0) == doctest::Approx(25e-10));
  CHECK(default_jitter(KernelSpec::linear(), X * 1e6, 1e-6) == doctest::Approx(1e-8));
}

TEST_CASE("ill-conditioned dictionaries are rejected") {
  Eigen::MatrixXd cols(2, 2);
  cols << 1, 1, 0, 1e-12;
  CHECK_THROWS_AS(SparseDictionary::from_columns(KernelSpec::linear(), cols), IllConditionedError);
}
