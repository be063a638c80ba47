#include "helpers.hpp"

#include "screenclean/persistence.hpp"

#include <doctest.h>

using namespace screenclean;
using testing::gaussian_matrix;
using testing::gaussian_vector;

TEST_CASE("risk model validation") {
  CHECK_THROWS_AS(RiskModel(Eigen::MatrixXd::Identity(2, 3)), Error);
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(RiskModel{asym}, Error);
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  try {
    RiskModel r(indefinite);
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  CHECK(RiskModel(Eigen::Matrix3d::Identity()).p() == 2);
}

TEST_CASE("predictive risk identities") {
  const auto model = SimModel{ModelKind::B, 100, 12, 0.3, 0.5, 0.01, 1.5};
  const RiskModel risk(population_gamma(model));
  const Eigen::VectorXd beta = true_beta(model);
  // beta = 0 gives E(Y^2).
  CHECK(predictive_risk(Eigen::VectorXd(Eigen::VectorXd::Zero(12)), risk) == doctest::Approx(risk.gamma()(0, 0)));
  // Sigma = I: R(b) = sigma^2 + |b - beta|^2.
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Eigen::VectorXd b = gaussian_vector(12, s);
    CHECK(predictive_risk(b, risk) == doctest::Approx(2.25 + (b - beta).squaredNorm()));
  }
  CHECK(predictive_risk(beta, risk) == doctest::Approx(2.25));
  CHECK_THROWS_AS(predictive_risk(Eigen::VectorXd(Eigen::VectorXd::Zero(3)), risk), Error);
}

TEST_CASE("empirical risk is the mean squared residual") {
  const Eigen::MatrixXd x = gaussian_matrix(40, 5, 1);
  const Eigen::VectorXd y = gaussian_vector(40, 2);
  const Dataset d(y, x);
  const auto risk = empirical_risk_model(d);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Eigen::VectorXd b = gaussian_vector(5, 10 + s);
    CHECK(predictive_risk(b, risk) == doctest::Approx((y - x * b).squaredNorm() / 40).epsilon(1e-12));
  }
}

TEST_CASE("gram lasso agrees with the KKT conditions") {
  const Eigen::MatrixXd x = gaussian_matrix(30, 8, 3);
  const Eigen::VectorXd y = x.col(0) * 2 + gaussian_vector(30, 4);
  GramLasso<double> solver(x, y);
  const double lambda = 0.3 * solver.lambda_max();
  const Eigen::VectorXd b = solver.solve(lambda);
  const Eigen::VectorXd grad = 2 * x.transpose() * (y - x * b);
  for (Index j = 0; j < 8; ++j) {
    if (b(j) != 0) {
      CHECK(grad(j) == doctest::Approx(lambda * (b(j) > 0 ? 1 : -1)).epsilon(1e-8));
    } else {
      CHECK(std::abs(grad(j)) <= lambda * (1 + 1e-8));
    }
  }
  CHECK(solver.solve(solver.lambda_max()).isZero());
}

TEST_CASE("constrained lasso: trivial radii") {
  const Eigen::MatrixXd x = gaussian_matrix(50, 4, 5);
  const Eigen::VectorXd y = x * Eigen::Vector4d(1, -1, 0.5, 0) + gaussian_vector(50, 6);
  const Dataset d(y, x);
  CHECK(constrained_lasso(d, 0.0).isZero());
  const Eigen::VectorXd ols = testing::naive_ols(x, y, {0, 1, 2, 3});
  const Eigen::VectorXd wide = constrained_lasso(d, ols.lpNorm<1>() + 1.0);
  CHECK((wide - ols).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(constrained_lasso(d, -1.0), Error);
}

TEST_CASE("constrained lasso: active constraint hits the boundary") {
  const Eigen::MatrixXd x = gaussian_matrix(50, 6, 7);
  const Eigen::VectorXd y = x * (Eigen::VectorXd(6) << 2, -1, 0, 0, 1, 0).finished() + gaussian_vector(50, 8);
  const Dataset d(y, x);
  for (double omega : {0.1, 0.5, 1.5, 3.0}) {
    const Eigen::VectorXd b = constrained_lasso(d, omega);
    CHECK(b.lpNorm<1>() <= omega * (1 + 1e-12));
    CHECK(b.lpNorm<1>() >= omega * (1 - 1e-4));
  }
}

TEST_CASE("constrained lasso matches a grid search over the p = 2 ball") {
  const Eigen::MatrixXd x = gaussian_matrix(25, 2, 9);
  const Eigen::VectorXd y = x * Eigen::Vector2d(1.2, -0.7) + 0.5 * gaussian_vector(25, 10);
  const Dataset d(y, x);
  for (double omega : {0.4, 1.0}) {
    const Eigen::VectorXd b = constrained_lasso(d, omega, 1e-8);
    const double solved = (y - x * b).squaredNorm();
    // Optimum lies on the boundary |b1| + |b2| = omega; scan it at step 1e-3
    // in b1 plus the interior at the same resolution.
    double best = 1e300;
    const double step = 1e-3;
    for (double b1 = -omega; b1 <= omega + 1e-12; b1 += step) {
      const double rest = omega - std::abs(b1);
      for (double b2 : {rest, -rest}) {
        best = std::min(best, (y - x * Eigen::Vector2d(b1, b2)).squaredNorm());
      }
    }
    for (double b1 = -omega; b1 <= omega; b1 += 0.01) {
      for (double b2 = -(omega - std::abs(b1)); b2 <= omega - std::abs(b1); b2 += 0.01) {
        best = std::min(best, (y - x * Eigen::Vector2d(b1, b2)).squaredNorm());
      }
    }
    CHECK(solved <= best + 1e-5 * (1 + best));
    CHECK(best - solved < 1e-2);
  }
}

TEST_CASE("radius grid") {
  const auto g = radius_grid(2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(radius_grid(2.0, 1), Error);
}

TEST_CASE("cv radius selection picks the held-out minimizer") {
  const Eigen::MatrixXd x = gaussian_matrix(120, 5, 11);
  const Eigen::VectorXd y = x * Eigen::VectorXd::LinSpaced(5, 1.0, 0.0) + gaussian_vector(120, 12);
  const Dataset train = Dataset(y.head(60), x.topRows(60));
  const Dataset hold = Dataset(y.tail(60), x.bottomRows(60));
  const auto sel = cv_radius_select(train, hold, 3.0, 13);
  REQUIRE(sel.radii.size() == 13);
  REQUIRE(sel.path.size() == 13);
  for (std::size_t k = 0; k < 13; ++k) {
    const double mse = (hold.y() - hold.x() * sel.path[k]).squaredNorm() / 60;
    CHECK(sel.heldout_mse[k] == doctest::Approx(mse));
    CHECK(sel.heldout_mse[sel.chosen] <= mse);
    CHECK(sel.path[k].lpNorm<1>() <= sel.radii[k] * (1 + 1e-12));
  }
  CHECK(sel.radius == sel.radii[sel.chosen]);
  CHECK(sel.beta == sel.path[sel.chosen]);
  CHECK(sel.chosen > 0);
}

TEST_CASE("persistence gap") {
  const RiskModel risk(Eigen::Matrix3d::Identity());
  std::vector<Eigen::VectorXd> path{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 2)};
  // R = 1 + |b|^2: 1, 2, 9.
  CHECK(persistence_gap(path[1], path, risk) == doctest::Approx(1.0));
  CHECK(persistence_gap(path[0], path, risk) == doctest::Approx(0.0));
}

TEST_CASE("persistence model stays inside the smallest ball") {
  PersistenceConfig cfg;
  const auto m = persistence_model(cfg, 100);
  CHECK(m.p == 20);
  CHECK(true_beta(m).lpNorm<1>() == doctest::Approx(2.25));
  CHECK(true_beta(m).lpNorm<1>() < std::pow(100.0, 0.2));
}

TEST_CASE("noiseless persistence run has zero gap") {
  PersistenceConfig cfg;
  cfg.ns = {100, 400};
  cfg.replicates = 3;
  cfg.sigma = 0;
  cfg.grid = 20;
  const auto report = run_persistence(cfg);
  REQUIRE(report.summary.size() == 2);
  for (const auto& s : report.summary) {
    CHECK(s.max_gap <= 1e-6);
    CHECK(s.replicates == 3);
  }
}

TEST_CASE("persistence run is deterministic and thread-independent") {
  PersistenceConfig cfg;
  cfg.ns = {100};
  cfg.replicates = 6;
  cfg.grid = 10;
  cfg.seed = 5;
  const auto a = run_persistence(cfg, 1);
  const auto b = run_persistence(cfg, 3);
  CHECK(a.gaps == b.gaps);
  REQUIRE(a.curve.size() == 10);
  CHECK(a.curve.front().l1_norm == 0.0);
  for (const auto& g : a.gaps[0]) CHECK(g >= -1e-12);
  CHECK(a.summary[0].omega == doctest::Approx(std::pow(100.0, 0.2)));
}
