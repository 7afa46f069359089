#include <cmath>
#include <numbers>

#include "doctest.h"
#include "robustm/dgp.hpp"
#include "robustm/error.hpp"
#include "robustm/estimate.hpp"
#include "robustm/numeric.hpp"

using namespace robustm;

namespace {

ModelSpec linear_model(int d1, int d2) {
  ModelSpec m;
  if (d1 > 0) m.nonstat_links = {LinkSpec::identity()};
  if (d2 > 0) m.stat_links = {LinkSpec::identity()};
  m.d1 = d1;
  m.d2 = d2;
  return m;
}

Dataset gaussian_panel(int n, int d1, int d2, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.X.resize(n, d1);
  data.Z.resize(n, d2);
  data.y.resize(n);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < d1; ++k) data.X(t, k) = rng.normal();
    for (int k = 0; k < d2; ++k) data.Z(t, k) = rng.normal();
  }
  return data;
}

Eigen::VectorXd normal_residuals(int n, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd e(n);
  for (auto& v : e) v = sd * rng.normal();
  return e;
}

}  // namespace

TEST_CASE("quadratic minimizer closed form") {
  Eigen::MatrixXd J = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd psi(3);
  psi << 1, 2, 3;
  const Eigen::VectorXd b = quadratic_minimizer(J, psi, 1.0, 0.0);
  CHECK(b[0] == doctest::Approx(6.0 / std::sqrt(3.0)).epsilon(1e-15));
  // Brute-force minimization of the surrogate on a fine grid.
  auto q = [&](double beta) { return -psi.sum() / std::sqrt(3.0) * beta + 0.5 * beta * beta; };
  double best = 0.0;
  for (double beta = 0.0; beta < 6.0; beta += 1e-4) {
    if (q(beta) < q(best)) best = beta;
  }
  CHECK(std::abs(best - b[0]) < 1e-4);

  CHECK(quadratic_minimizer(J, Eigen::VectorXd::Zero(3), 1.0, 0.0).norm() == 0.0);
}

TEST_CASE("quadratic minimizer under squared error is least squares") {
  const int n = 50;
  Rng rng(3);
  Eigen::MatrixXd J(n, 3);
  Eigen::VectorXd e(n);
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < 3; ++k) J(t, k) = rng.normal();
    e[t] = rng.normal();
  }
  const LossSpec se = LossSpec::squared_error();
  Eigen::VectorXd psi(n);
  for (int t = 0; t < n; ++t) psi[t] = subgrad(se, e[t]);
  const double a2 = estimate_a2(e, se, MollifierOrder(1.0));
  CHECK(a2 == 2.0);
  const Eigen::VectorXd b = quadratic_minimizer(J, psi, a2, 0.0) / std::sqrt(double(n));
  const Eigen::VectorXd ols = J.colPivHouseholderQr().solve(e);
  CHECK((b - ols).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank deficiency names the offending column") {
  Eigen::MatrixXd J(4, 2);
  J << 1, 2, 2, 4, 3, 6, 4, 8;
  try {
    quadratic_minimizer(J, Eigen::VectorXd::Ones(4), 1.0, 0.0, {"theta11", "gamma1"});
    FAIL("expected a rank error");
  } catch (const RankError& err) {
    CHECK(std::string(err.what()).find("gamma1") != std::string::npos);
  }
}

TEST_CASE("a1 estimates") {
  const Eigen::VectorXd e = normal_residuals(5000, 0.5, 1);
  CHECK(estimate_a1(e, LossSpec::lad()) == 1.0);
  const double shift = normal_quantile(0.3);
  const Eigen::VectorXd centered = (normal_residuals(20000, 1.0, 2).array() - shift).matrix();
  CHECK(estimate_a1(centered, LossSpec::quantile(0.3)) == doctest::Approx(0.21).epsilon(0.05));
  CHECK_THROWS_AS(estimate_a1(Eigen::VectorXd(), LossSpec::lad()), ShapeError);
}

TEST_CASE("a2 estimates match the smoothed expectation") {
  // E[rho_m''(e)] for Gaussian e is a Gaussian density or probability with
  // variance inflated by 1/(2m).
  const int n = 200000;
  const double m = 100.0;
  const MollifierOrder order(m);
  auto check = [&](const Eigen::VectorXd& e, const LossSpec& loss, double expected) {
    Eigen::VectorXd h(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) h[i] = mollified_hess(loss, order, e[i]);
    const double mean = h.mean();
    const double se = std::sqrt((h.array() - mean).square().sum() / (n - 1) / n);
    CHECK(estimate_a2(e, loss, order) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(std::abs(mean - expected) < 3.0 * se);
  };
  auto density = [](double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
  };
  const double inflate = 1.0 / (2.0 * m);

  check(normal_residuals(n, 0.5, 3), LossSpec::lad(), 2.0 * density(0.0, 0.25 + inflate));

  const double q = normal_quantile(0.3);
  check((normal_residuals(n, 1.0, 5).array() - q).matrix(), LossSpec::quantile(0.3),
        density(q, 1.0 + inflate));

  const double c = 1.25 / std::sqrt(1.0 + inflate);
  check(normal_residuals(n, 1.0, 4), LossSpec::huber(1.25), normal_cdf(c) - normal_cdf(-c));

  CHECK(estimate_a2(normal_residuals(10, 1.0, 6), LossSpec::squared_error().scaled(2.5), order) ==
        5.0);
}

TEST_CASE("huber a2 at the sample-size order") {
  const Eigen::VectorXd unit = normal_residuals(5000, 1.0, 4);
  const double a2 = estimate_a2(unit, LossSpec::huber(1.25), MollifierOrder::from_sample_size(5000));
  CHECK(std::abs(a2 / 0.7887 - 1.0) < 0.05);
}

TEST_CASE("sigma estimate") {
  ModelSpec m = linear_model(0, 2);
  ParamVector p;
  p.gamma1.resize(0);
  p.theta2 = {Eigen::Vector2d(1, 0)};
  p.gamma2 = Eigen::VectorXd::Ones(1);
  Dataset zero = gaussian_panel(10, 0, 2, 1);
  zero.Z.setZero();
  zero.y.setZero();
  CHECK(estimate_sigma(m, p, zero).cwiseAbs().maxCoeff() == 0.0);

  Dataset big = gaussian_panel(100000, 0, 2, 2);
  big.y.setZero();
  const Eigen::MatrixXd s = estimate_sigma(m, p, big);
  CHECK(s.rows() == 3);
  CHECK((s.topLeftCorner(2, 2) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 0.02);
  CHECK((s - s.transpose()).norm() == 0.0);

  Dataset small = gaussian_panel(20, 0, 2, 3);
  small.y.setZero();
  Dataset doubled = small;
  doubled.Z.resize(40, 2);
  doubled.Z << small.Z, small.Z;
  doubled.y = Eigen::VectorXd::Zero(40);
  CHECK((estimate_sigma(m, p, small) - estimate_sigma(m, p, doubled)).cwiseAbs().maxCoeff() < 1e-15);

  ModelSpec nonstat = linear_model(2, 0);
  CHECK_THROWS_AS(estimate_sigma(nonstat, ParamVector{}, small), ShapeError);
}

TEST_CASE("stationary covariance") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK((stationary_covariance(1, 1, id, 100) - 0.01 * id).cwiseAbs().maxCoeff() < 1e-17);
  const Eigen::MatrixXd s = Eigen::Vector3d(2, 3, 4).asDiagonal();
  CHECK((stationary_covariance(0.7, 1.3, s, 200) * 2 - stationary_covariance(0.7, 1.3, s, 100))
            .cwiseAbs()
            .maxCoeff() < 1e-17);
  const double a2 = 2.0 / (0.5 * std::sqrt(2.0 * std::numbers::pi));
  CHECK(stationary_covariance(1.0, a2, id, 1)(0, 0) == doctest::Approx(0.3927).epsilon(1e-3));
  Eigen::MatrixXd singular = id;
  singular(2, 2) = 0.0;
  CHECK_THROWS_AS(stationary_covariance(1, 1, singular, 10), RankError);
}

TEST_CASE("squared error fit equals least squares") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ModelSpec m = linear_model(2, 3);
    Dataset data = gaussian_panel(200, 2, 3, seed);
    Rng rng(seed + 100);
    for (int t = 0; t < 200; ++t) {
      data.y[t] = 1.5 * data.X(t, 0) - 0.5 * data.X(t, 1) + 0.3 * data.Z(t, 2) + rng.normal();
    }
    FitOptions opts;
    opts.loss = LossSpec::squared_error();
    const FitResult r = fit(m, data, opts);
    CHECK(r.converged);
    Eigen::MatrixXd a(200, 5);
    a << data.X, data.Z;
    const Eigen::VectorXd ols = a.colPivHouseholderQr().solve(data.y);
    Eigen::VectorXd est(5);
    est << r.params.gamma1[0] * r.params.theta1[0], r.params.gamma2[0] * r.params.theta2[0];
    CHECK((est - ols).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.a2_hat == 2.0);
  }
}

TEST_CASE("squared error fit from a poor start still reaches least squares") {
  const ModelSpec m = linear_model(2, 2);
  Dataset data = gaussian_panel(200, 2, 2, 9);
  Rng rng(10);
  for (int t = 0; t < 200; ++t) data.y[t] = data.X(t, 0) + 2 * data.Z(t, 1) + rng.normal();
  FitOptions opts;
  opts.loss = LossSpec::squared_error();
  ParamVector start;
  start.theta1 = {Eigen::Vector2d(0, 1)};
  start.gamma1 = Eigen::VectorXd::Constant(1, 0.1);
  start.theta2 = {Eigen::Vector2d(1, 0)};
  start.gamma2 = Eigen::VectorXd::Constant(1, 0.1);
  opts.initial = start;
  const FitResult r = fit(m, data, opts);
  Eigen::MatrixXd a(200, 4);
  a << data.X, data.Z;
  const Eigen::VectorXd ols = a.colPivHouseholderQr().solve(data.y);
  Eigen::VectorXd est(4);
  est << r.params.gamma1[0] * r.params.theta1[0], r.params.gamma2[0] * r.params.theta2[0];
  CHECK(r.converged);
  CHECK((est - ols).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero-noise data is recovered") {
  for (const auto& loss : {LossSpec::lad(), LossSpec::quantile(0.3), LossSpec::huber(1.25)}) {
    auto sim = gen_example(ExampleId::kEx51, 100, ErrorLaw::kNormal, 17);
    sim.data.y = fitted_values(sim.model, sim.truth, sim.data);
    ParamVector start = sim.truth;
    start.theta1[0] = Eigen::Vector2d(0.75, 0.66).normalized();
    start.gamma1[1] += 0.05;
    start.gamma2[0] -= 0.05;
    FitOptions opts;
    opts.loss = loss;
    opts.multistart = 1;
    opts.initial = start;
    const FitResult r = fit(sim.model, sim.data, opts);
    CHECK(r.converged);
    CHECK((r.params.flatten() - sim.truth.flatten()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("fit recovers the stationary coefficient of the first example") {
  const auto sim = gen_example(ExampleId::kEx51, 200, ErrorLaw::kNormal, 2026);
  FitOptions opts;
  opts.loss = LossSpec::lad();
  const FitResult r = fit(sim.model, sim.data, opts);
  CHECK(r.converged);
  CHECK(std::abs(r.params.gamma2[0] - 1.0) < 0.15);
  for (const auto& t : r.params.theta1) {
    CHECK(std::abs(t.norm() - 1.0) < 1e-12);
    CHECK(t[0] > 0.0);
  }
  CHECK(r.a1_hat >= 0.0);
  CHECK(r.a2_hat > 0.0);
  CHECK(r.sigma_hat.rows() == 3);
  CHECK(r.stat_cov.rows() == 3);
  CHECK(r.objective <= 0.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.sigma_hat);
  CHECK(eig.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("every accepted step decreases the exact objective") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sim = gen_example(ExampleId::kEx52, 120, ErrorLaw::kT2, seed);
    FitOptions opts;
    opts.loss = LossSpec::quantile(0.3);
    opts.multistart = 2;
    const FitResult r = fit(sim.model, sim.data, opts);
    REQUIRE(r.loss_trace.size() >= 2);
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) {
      CHECK(r.loss_trace[i] < r.loss_trace[i - 1]);
    }
    CHECK(r.loss_trace.back() == doctest::Approx(r.loss_value).epsilon(1e-12));
  }
}

TEST_CASE("scaling the loss leaves the estimate unchanged") {
  const auto sim = gen_example(ExampleId::kEx51, 100, ErrorLaw::kMixedNormal, 8);
  FitOptions opts;
  opts.loss = LossSpec::huber(1.25);
  const FitResult a = fit(sim.model, sim.data, opts);
  opts.loss = LossSpec::huber(1.25).scaled(3.7);
  const FitResult b = fit(sim.model, sim.data, opts);
  CHECK((a.params.flatten() - b.params.flatten()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("iteration cap reports non-convergence") {
  const auto sim = gen_example(ExampleId::kEx51, 100, ErrorLaw::kNormal, 3);
  FitOptions opts;
  opts.loss = LossSpec::lad();
  opts.max_iter = 1;
  opts.multistart = 1;
  const FitResult r = fit(sim.model, sim.data, opts);
  CHECK_FALSE(r.converged);
}

TEST_CASE("collinear regressors raise a rank error") {
  const ModelSpec m = linear_model(2, 0);
  Dataset data = gaussian_panel(50, 2, 0, 4);
  data.X.col(1) = data.X.col(0);
  data.y = data.X.col(0);
  FitOptions opts;
  opts.loss = LossSpec::squared_error();
  try {
    fit(m, data, opts);
    FAIL("expected a rank error");
  } catch (const RankError& err) {
    CHECK(std::string(err.what()).find("theta1") != std::string::npos);
  }
}

TEST_CASE("fit options validation") {
  FitOptions opts;
  opts.tol = 0.0;
  CHECK_THROWS_AS(opts.validate(), ConfigError);
  opts = FitOptions{};
  opts.multistart = 0;
  CHECK_THROWS_AS(opts.validate(), ConfigError);
  opts = FitOptions{};
  CHECK(opts.starts_for(linear_model(2, 2)) == 1);
  CHECK(opts.starts_for(example_model(ExampleId::kEx51)) == 8);
}

TEST_CASE("fit result json") {
  const auto sim = gen_example(ExampleId::kEx52, 80, ErrorLaw::kNormal, 1);
  FitOptions opts;
  opts.loss = LossSpec::huber(1.25);
  opts.multistart = 2;
  const FitResult r = fit(sim.model, sim.data, opts);
  const auto j = fit_result_to_json(sim.model, r);
  for (const char* key : {"params", "a1_hat", "a2_hat", "sigma_hat", "stat_cov", "objective",
                          "iterations", "converged"}) {
    CHECK(j.contains(key));
  }
  const ParamVector back = params_from_json(sim.model, j["params"]);
  CHECK(back.flatten() == r.params.flatten());
  CHECK(j["param_values"]["theta11"].get<double>() == r.params.theta1[0][0]);
}
