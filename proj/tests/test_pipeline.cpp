#include "plando/errors.hpp"
#include "plando/pipeline.hpp"
#include "plando/scenarios.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace plando;

namespace {

// x_{j+1} = A(mu) x_j with A(mu) = [[mu, 0.1], [0, mu / 2]]
Eigen::Matrix2d linear_system(double mu) {
  Eigen::Matrix2d A;
  A << mu, 0.1, 0.0, 0.5 * mu;
  return A;
}

std::vector<ParameterInstance> linear_instances(const Eigen::VectorXd& mus, double dt = 0.5) {
  std::vector<ParameterInstance> out;
  for (Eigen::Index i = 0; i < mus.size(); ++i) {
    const Eigen::MatrixXd X = testing::power_trajectory(linear_system(mus(i)), Eigen::Vector2d(1.0, 1.0), 12);
    out.push_back({Eigen::VectorXd::Constant(1, mus(i)), SnapshotSet::discrete(X, uniform_grid(0, 11 * dt, 12))});
  }
  return out;
}

ScenarioConfig small_lv(Eigen::Index n_train) {
  ScenarioConfig c = ScenarioConfig::defaults("lv");
  c.n_train = n_train;
  c.n_valid = 12;
  c.n_test = 10;
  c.test_times = {100.0};
  return c;
}

MlpConfig quick_mlp(Eigen::Index in, Eigen::Index out, int epochs) {
  MlpConfig c = MlpConfig::lv_preset(in, out);
  c.max_epochs = epochs;
  c.patience = std::min(200, epochs);
  return c;
}

}  // namespace

TEST_CASE("population mean and std") {
  const auto [m, s] = mean_and_std(Eigen::Vector2d(0.01, 0.03));
  CHECK(std::abs(m - 0.02) <= 1e-15);
  CHECK(std::abs(s - 0.01) <= 1e-15);
  CHECK_THROWS_AS(mean_and_std(Eigen::VectorXd()), std::invalid_argument);

  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = testing::random_int(rng, 1, 500);
    const Eigen::VectorXd e = testing::random_vector(rng, n, 0.0, 0.2);
    // long double two-pass oracle
    long double sum = 0;
    for (Eigen::Index i = 0; i < n; ++i) sum += e(i);
    const long double mean = sum / n;
    long double sq = 0;
    for (Eigen::Index i = 0; i < n; ++i) sq += (e(i) - mean) * (e(i) - mean);
    const auto [mm, ss] = mean_and_std(e);
    CHECK(std::abs(mm - static_cast<double>(mean)) <= 1e-14 * static_cast<double>(mean));
    CHECK(std::abs(ss - static_cast<double>(std::sqrt(sq / n))) <= 1e-14 * std::max(1e-3, static_cast<double>(mean)));
  }
}

TEST_CASE("relative error") {
  CHECK(relative_l2_error(Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 4)) == 0.0);
  CHECK(relative_l2_error(Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0)) == 1.0);
  CHECK(relative_l2_error(Eigen::Vector2d(3, 4), Eigen::Vector2d(3, 3)) == doctest::Approx(0.2));
  CHECK_THROWS_AS(relative_l2_error(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(relative_l2_error(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
}

TEST_CASE("offline stage") {
  SUBCASE("one instance matches a direct fit") {
    const auto inst = linear_instances(Eigen::VectorXd::Constant(1, 0.7));
    const OfflineBundle b = offline(inst, KernelSpec::linear(), 1e-12, 5);
    REQUIRE(b.models.size() == 1);
    const LandoModel direct = fit(inst[0].snapshots, KernelSpec::linear(), 1e-12, 5);
    CHECK((b.models[0].model.weights.array() == direct.weights.array()).all());
    CHECK((b.models[0].model.dictionary.columns.array() == direct.dictionary.columns.array()).all());
    CHECK(b.mode == Mode::Discrete);
    CHECK(b.dt == doctest::Approx(0.5));
    CHECK(b.train_t_end == doctest::Approx(5.5));
    CHECK(b.initial_state == Eigen::Vector2d(1, 1));
  }
  SUBCASE("Lotka-Volterra dictionaries stay small") {
    ScenarioConfig c = small_lv(12);
    c.n_valid = 1;
    c.test_times = {};
    const Dataset ds = generate_dataset(c);
    const OfflineBundle b = offline(to_instances(c, ds.train), KernelSpec::quadratic(), 1e-6, 0);
    for (Eigen::Index m : b.dictionary_sizes()) {
      CHECK(m >= 3);
      CHECK(m <= 12);
    }
    for (double r : b.fit_residuals()) CHECK(r <= 1e-2);
  }
  SUBCASE("heat setup completes") {
    ScenarioConfig c = ScenarioConfig::defaults("heat");
    c.n_train = 3;
    c.n_valid = 1;
    c.n_test = 1;
    c.test_times = {};
    const Dataset ds = generate_dataset(c);
    const OfflineBundle b = offline(to_instances(c, ds.train), KernelSpec::linear(), 1e-5, 0);
    CHECK(b.models.size() == 3);
    CHECK(b.dt == doctest::Approx(0.01));
    CHECK(b.train_t_end == doctest::Approx(2.0));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(offline({}, KernelSpec::linear(), 1e-6, 0), std::invalid_argument);
    auto a = linear_instances(Eigen::Vector2d(0.5, 0.6));
    auto b = linear_instances(Eigen::VectorXd::Constant(1, 0.7), 0.25);
    a.push_back(b[0]);
    CHECK_THROWS_AS(offline(a, KernelSpec::linear(), 1e-6, 0), std::invalid_argument);
    // a fit failure names the parameter
    auto zero = linear_instances(Eigen::Vector2d(0.5, 0.6));
    zero[1].snapshots = SnapshotSet::discrete(Eigen::MatrixXd::Zero(2, 12), uniform_grid(0, 5.5, 12));
    try {
      offline(zero, KernelSpec::linear(), 1e-6, 0);
      FAIL("expected a fit failure");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("0.6") != std::string::npos);
    }
  }
}

TEST_CASE("online data generation") {
  const Eigen::VectorXd mus = Eigen::VectorXd::LinSpaced(6, 0.5, 0.9);
  const OfflineBundle b = offline(linear_instances(mus), KernelSpec::linear(), 1e-12, 0);
  SUBCASE("t* = 0 returns x0") {
    const Eigen::MatrixXd S = generate_at(b, 0.0, Eigen::Vector2d(2, -1));
    for (Eigen::Index i = 0; i < S.cols(); ++i) CHECK(S.col(i) == Eigen::Vector2d(2, -1));
  }
  SUBCASE("exact-DMD bundle matches matrix powers") {
    const Eigen::Vector2d x0(-0.4, 1.3);
    for (double t : {0.5, 3.0, 10.0}) {
      const Eigen::MatrixXd S = generate_at(b, t, x0);
      const int j = static_cast<int>(std::lround(t / 0.5));
      for (Eigen::Index i = 0; i < mus.size(); ++i) {
        Eigen::Vector2d truth = x0;
        for (int k = 0; k < j; ++k) truth = linear_system(mus(i)) * truth;
        CHECK((S.col(i) - truth).norm() <= 1e-6 * truth.norm());
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(generate_at(b, -1.0, Eigen::Vector2d(1, 1)), std::invalid_argument);
  }
  SUBCASE("blow-up names the parameter") {
    std::vector<BundleEntry> boom = b.models;
    boom[2].model.weights *= 1e100;
    try {
      generate_at(boom, Mode::Discrete, 0.5, 50.0, Eigen::Vector2d(1, 1));
      FAIL("expected blow-up");
    } catch (const BlowUpError& e) {
      CHECK(std::string(e.what()).find("mu = (0.66") != std::string::npos);
    }
  }
}

TEST_CASE("Lotka-Volterra pipeline") {
  const ScenarioConfig c = small_lv(40);
  const Dataset ds = generate_dataset(c);
  const OfflineBundle b = offline(to_instances(c, ds.train), KernelSpec::quadratic(), 1e-6, 0, to_instances(c, ds.valid));
  const Eigen::Vector2d x0(80, 20);

  SUBCASE("generated states follow the reference solver") {
    const Eigen::MatrixXd S = generate_at(b, 100.0, x0);
    const Eigen::MatrixXd train_mus = ds.train.mus;
    const Eigen::MatrixXd ref = reference_at(c, train_mus, 100.0);
    for (Eigen::Index i = 0; i < S.cols(); ++i) CHECK(relative_l2_error(ref.col(i), S.col(i)) <= 0.02);
  }

  OnlineOptions opts;
  opts.mlp = quick_mlp(1, 2, 2000);
  opts.mlp.snake_a = 3.0;
  const OnlineModel m = online(b, 100.0, x0, opts);

  SUBCASE("no POD for a two-dimensional state") {
    CHECK(!m.pod);
    CHECK(m.map.config.output_dim == 2);
    CHECK(m.output_dim() == 2);
    CHECK(!m.extrapolated);
    CHECK(m.max_fit_residual >= m.mean_fit_residual);
  }
  SUBCASE("prediction at mu = 0.05") {
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(1, 0.05);
    const Eigen::VectorXd ref = reference_at(c, mu, 100.0).col(0);
    CHECK(relative_l2_error(ref, predict(m, mu)) <= 0.03);
  }
  SUBCASE("prediction at a training parameter is close to the generated datum") {
    const Eigen::MatrixXd S = generate_at(b, 100.0, x0);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.models.size(); ++i)
      worst = std::max(worst, relative_l2_error(S.col(static_cast<Eigen::Index>(i)), predict(m, b.models[i].mu)));
    CHECK(worst <= 0.05);
  }
  SUBCASE("evaluation report") {
    const ErrorReport r = evaluate(m, ds.test.mus, ds.test.states_at(100.0));
    CHECK(r.count == 10);
    CHECK(r.mean <= 0.03);
    const auto [mm, ss] = mean_and_std(r.errors);
    CHECK(std::abs(r.mean - mm) <= 1e-14 * mm);
    CHECK(std::abs(r.std_dev - ss) <= 1e-14 * std::max(mm, 1e-12));
    CHECK(r.t_star == 100.0);
    CHECK(r.dnn_valid_loss == m.map.best_valid_loss);
    CHECK(r.mean_fit_residual == m.mean_fit_residual);
    CHECK(r.pod_rank == 0);
  }
  SUBCASE("extrapolation flags") {
    CHECK(predict_checked(m, Eigen::VectorXd::Constant(1, 0.2)).extrapolated_parameter);
    CHECK(!predict_checked(m, Eigen::VectorXd::Constant(1, 0.05)).extrapolated_parameter);
    CHECK_THROWS_AS(predict(m, Eigen::Vector2d(0.05, 0.1)), std::invalid_argument);
    OnlineOptions short_opts = opts;
    short_opts.mlp.max_epochs = 1;
    short_opts.mlp.patience = 1;
    CHECK(online(b, 450.0, x0, short_opts).extrapolated);
  }
  SUBCASE("end-to-end determinism") {
    const OnlineModel again = online(b, 100.0, x0, opts);
    const ErrorReport r1 = evaluate(m, ds.test.mus, ds.test.states_at(100.0));
    const ErrorReport r2 = evaluate(again, ds.test.mus, ds.test.states_at(100.0));
    CHECK((r1.errors.array() == r2.errors.array()).all());
    CHECK(r1.mean == r2.mean);
    CHECK(r1.std_dev == r2.std_dev);
  }
}

TEST_CASE("heat pipeline keeps few POD modes") {
  ScenarioConfig c = ScenarioConfig::defaults("heat");
  c.n_train = 30;
  c.n_valid = 8;
  c.n_test = 4;
  c.test_times = {1.0};
  const Dataset ds = generate_dataset(c);
  const OfflineBundle b = offline(to_instances(c, ds.train), KernelSpec::linear(), 1e-5, 0, to_instances(c, ds.valid));
  OnlineOptions opts;
  opts.pod = PodConfig{};
  opts.mlp = MlpConfig::pde_preset(1, 1);
  opts.mlp.max_epochs = 300;
  opts.mlp.patience = 100;
  const OnlineModel m = online(b, 1.0, b.initial_state, opts);
  REQUIRE(m.pod);
  CHECK(m.pod->rank() <= 6);
  CHECK(m.map.config.output_dim == m.pod->rank());
  CHECK(m.pod_projection_error <= 1e-2);
  const ErrorReport r = evaluate(m, ds.test.mus, ds.test.states_at(1.0));
  CHECK(r.pod_rank == m.pod->rank());
  CHECK(r.mean <= 0.02);
}

TEST_CASE("evaluation examples") {
  // hand-built model: identity network on a three-dimensional parameter
  OnlineModel m;
  m.state_dim = 3;
  m.t_star = 1.0;
  MlpConfig c;
  c.input_dim = 3;
  c.output_dim = 3;
  m.map = init_network(c);
  m.map.layers[0].weight.setIdentity();
  m.map.layers[0].bias.setZero();

  const Eigen::Matrix3d mus = Eigen::Matrix3d::Random() + 2.0 * Eigen::Matrix3d::Ones();
  SUBCASE("exact predictions") {
    const ErrorReport r = evaluate(m, mus, mus);
    CHECK(r.mean == 0.0);
    CHECK(r.std_dev == 0.0);
  }
  SUBCASE("zero prediction") {
    m.map.layers[0].weight.setZero();
    const ErrorReport r = evaluate(m, mus.col(0), mus.col(0));
    CHECK(r.errors(0) == 1.0);
    CHECK(r.mean == 1.0);
  }
  SUBCASE("errors of 1% and 3%") {
    Eigen::MatrixXd refs = mus.leftCols(2);
    refs.col(0) /= 1.01;  // |x - 1.01 x| / |x| = 0.01 with x = refs.col(0)
    refs.col(1) /= 1.03;
    const ErrorReport r = evaluate(m, mus.leftCols(2), refs);
    CHECK(r.errors(0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.errors(1) == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(r.mean == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(r.std_dev == doctest::Approx(0.01).epsilon(1e-10));
  }
  SUBCASE("full POD basis round trip") {
    Rng rng(3);
    m.pod = compute_pod_rank(testing::random_matrix(rng, 3, 5), 3);
    const Eigen::Vector3d mu(0.3, -0.2, 0.9);
    const Eigen::VectorXd p = predict(m, mu);
    CHECK((p - m.pod->phi * m.map.forward(mu)).norm() <= 1e-12);
    CHECK((project(*m.pod, p) - m.map.forward(mu)).norm() <= 1e-8);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(evaluate(m, Eigen::MatrixXd(3, 0), Eigen::MatrixXd(3, 0)), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(m, mus, mus.leftCols(2)), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(m, mus, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
  }
}
