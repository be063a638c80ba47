#include "helpers.hpp"

#include "screenclean/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <random>

using namespace screenclean;

TEST_CASE("model names round-trip") {
  for (auto k : {ModelKind::A, ModelKind::B, ModelKind::C, ModelKind::D}) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK(parse_model_kind("b") == ModelKind::B);
  CHECK_THROWS_AS(parse_model_kind("E"), Error);
  CHECK(to_string(Procedure::AdaptiveLasso) != to_string(Procedure::Lasso));
}

TEST_CASE("true coefficients") {
  CHECK(true_beta(SimModel::table_default(ModelKind::A, 100, 100)).isZero());
  const auto b = true_beta(SimModel::table_default(ModelKind::B, 100, 100));
  for (Index j = 0; j < 9; ++j) CHECK(b(j) == doctest::Approx(0.5 * static_cast<double>(10 - (j + 1))));
  CHECK(b.tail(91).isZero());
  const auto t = TrueModel::from_beta(b, 1.0);
  CHECK(t.s == 9);
  CHECK(t.psi == doctest::Approx(0.5));
  CHECK(true_beta(SimModel::table_default(ModelKind::B, 100, 1000))(0) == doctest::Approx(13.5));
  const auto d = true_beta(SimModel::table_default(ModelKind::D, 100, 10));
  CHECK(d(0) == 10.0);
  CHECK(d(1) == -10.0);
  CHECK(d.tail(8).isZero());
}

TEST_CASE("generate is pure in the seed and returns both copies") {
  const auto m = SimModel::table_default(ModelKind::C, 50, 20);
  const auto a = generate(m, 9);
  const auto b = generate(m, 9);
  CHECK(a.raw.x() == b.raw.x());
  CHECK(a.raw.y() == b.raw.y());
  CHECK(generate(m, 10).raw.y() != a.raw.y());
  CHECK(a.standardized.standardized());
  CHECK(!a.raw.standardized());
  // Response follows X beta + sigma eps exactly on the raw copy.
  const Eigen::VectorXd resid = a.raw.y() - a.raw.x() * a.truth.beta;
  CHECK(resid.squaredNorm() / 50 < 3.0);
}

TEST_CASE("generator moments at large n") {
  auto m = SimModel::table_default(ModelKind::C, 100000, 6);
  const auto draw = generate(m, 1);
  const auto& x = draw.raw.x();
  for (Index j = 0; j < 6; ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1) < 0.02);
  }
  for (Index j = 0; j + 1 < 6; ++j) {
    const double r = (x.col(j).array() * x.col(j + 1).array()).mean();
    CHECK(std::abs(r - 0.5) < 0.02);
  }
  m.kind = ModelKind::B;
  const auto bx = generate(m, 2).raw.x();
  CHECK(std::abs((bx.col(0).array() * bx.col(1).array()).mean()) < 0.02);
}

TEST_CASE("model D covariates are nearly collinear") {
  const auto draw = generate(SimModel::table_default(ModelKind::D, 1000, 10), 3);
  const auto& x = draw.standardized.x();
  CHECK(x.col(0).dot(x.col(1)) / 1000 > 0.99);
  CHECK(x.col(0).dot(x.col(2)) / 1000 > 0.99);
  CHECK(std::abs(x.col(0).dot(x.col(5)) / 1000) < 0.15);
}

TEST_CASE("population covariance matches the generating equations") {
  const auto d = SimModel::table_default(ModelKind::D, 100, 10);
  const double rho = d.rho, tau = d.tau;
  const auto s = population_covariance(d);
  CHECK(s(0, 0) == doctest::Approx(1));
  CHECK(s(1, 1) == doctest::Approx(rho * rho + tau * tau));
  CHECK(s(0, 1) == doctest::Approx(rho));
  CHECK(s(1, 2) == doctest::Approx(rho * rho));
  CHECK(s(3, 3) == doctest::Approx(rho * rho * (rho * rho + tau * tau) + tau * tau));
  CHECK(s(1, 3) == doctest::Approx(rho * (rho * rho + tau * tau)));
  CHECK(s(2, 3) == doctest::Approx(rho * rho * rho));
  CHECK(s(4, 4) == 1.0);
  CHECK(s(0, 4) == 0.0);

  const auto c = population_covariance(SimModel::table_default(ModelKind::C, 100, 5));
  for (Index j = 0; j < 5; ++j) {
    for (Index k = 0; k < 5; ++k) CHECK(c(j, k) == doctest::Approx(std::pow(0.5, std::abs(j - k))));
  }

  const auto sample = generate(SimModel::table_default(ModelKind::C, 200000, 4), 5).raw.x();
  const Eigen::MatrixXd emp = sample.transpose() * sample / 200000.0;
  CHECK((emp - population_covariance(SimModel::table_default(ModelKind::C, 1, 4))).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("model D marginal effects: exact covariance algebra") {
  const auto d = SimModel::table_default(ModelKind::D, 100, 10);
  const double rho = d.rho, tau = d.tau;
  const auto mu = population_marginal(d);
  // Cov(X_j, Y) = 10 Cov(X_j, X_1) - 10 Cov(X_j, X_2).
  const double v2 = rho * rho + tau * tau;
  const double v4 = rho * rho * v2 + tau * tau;
  CHECK(mu(0) == doctest::Approx(10 * (1 - rho)));
  CHECK(mu(1) == doctest::Approx(10 * (rho - v2) / std::sqrt(v2)));
  CHECK(mu(2) == doctest::Approx(10 * (rho - rho * rho) / std::sqrt(v2)));
  CHECK(mu(3) == doctest::Approx(10 * (rho * rho - rho * v2) / std::sqrt(v4)));
  CHECK(mu.tail(6).isZero());
  // X_1's marginal effect is a twentieth of its coefficient.
  CHECK(std::abs(mu(0)) < 0.06 * std::abs(true_beta(d)(0)));
  // The correlation form of the same identity.
  const Eigen::MatrixXd s = population_covariance(d);
  const Eigen::VectorXd sd = s.diagonal().cwiseSqrt();
  const Eigen::MatrixXd corr = s.array() / (sd * sd.transpose()).array();
  const Eigen::VectorXd beta_std = true_beta(d).cwiseProduct(sd);
  CHECK((marginal_means_from_correlation(beta_std, corr) - mu).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(marginal_means_from_correlation(beta_std, Eigen::MatrixXd::Identity(3, 3)), Error);
}

TEST_CASE("population gamma") {
  const auto b = SimModel::table_default(ModelKind::B, 100, 12);
  const auto g = population_gamma(b);
  const auto beta = true_beta(b);
  CHECK(g(0, 0) == doctest::Approx(beta.squaredNorm() + 1));
  CHECK((g.block(1, 0, 12, 1) - beta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("metrics: counting examples") {
  const IndexSet support{0, 1, 2};
  std::vector<ReplicateOutcome> perfect(5, ReplicateOutcome{support, support});
  auto r = metrics(perfect, support, 100);
  CHECK(r.size == 0);
  CHECK(r.power_av == 1);
  CHECK(r.fpr == 0);
  CHECK(r.coverage == 1);
  CHECK(r.replicates == 5);

  // One false positive among 99 nulls.
  std::vector<ReplicateOutcome> one{{IndexSet{5}, std::nullopt}};
  r = metrics(one, IndexSet{0}, 100);
  CHECK(r.size == 1);
  CHECK(r.fpr == doctest::Approx(1.0 / 99));
  CHECK(r.power_av == 0);
  CHECK(std::isnan(r.coverage));

  std::vector<ReplicateOutcome> null_runs(4, ReplicateOutcome{{}, IndexSet{}});
  r = metrics(null_runs, {}, 10);
  CHECK(r.size == 0);
  CHECK(r.power_av == 0);
}

TEST_CASE("metrics: hand-counted power, size, fpr and standard errors") {
  const IndexSet support{0, 1};
  std::vector<ReplicateOutcome> outs{
      {IndexSet{0, 1}, IndexSet{0, 1, 2}},
      {IndexSet{0}, IndexSet{0, 1}},
      {IndexSet{0, 3, 4}, IndexSet{0, 1, 3, 4}},
      {IndexSet{}, IndexSet{0}},
  };
  const auto r = metrics(outs, support, 12);
  CHECK(r.size == doctest::Approx(0.25));
  CHECK(r.power_av == doctest::Approx((3.0 + 1.0) / (2 * 4)));
  CHECK(r.fpr == doctest::Approx(2.0 / 10 / 4));
  CHECK(r.coverage == doctest::Approx(0.5));  // the fourth misses 1 in S_hat, the third has false positives
  CHECK(r.se_size == doctest::Approx(std::sqrt(0.25 * 0.75 / 4)));
  // Per-replicate power 1, 0.5, 0.5, 0; sample sd / sqrt(R).
  const double var = (0.25 + 0 + 0 + 0.25) / 3;
  CHECK(r.se_power == doctest::Approx(std::sqrt(var / 4)));
  CHECK(r.fpr <= r.size);
}

TEST_CASE("metrics are invariant to replicate order") {
  std::mt19937 gen(5);
  std::vector<ReplicateOutcome> outs;
  for (int r = 0; r < 30; ++r) {
    IndexSet d;
    for (Index j = 0; j < 8; ++j) {
      if (gen() % 3 == 0) d.push_back(j);
    }
    outs.push_back({d, d});
  }
  const auto a = metrics(outs, {0, 1, 2}, 8);
  std::shuffle(outs.begin(), outs.end(), gen);
  const auto b = metrics(outs, {0, 1, 2}, 8);
  CHECK(a.size == b.size);
  CHECK(a.power_av == doctest::Approx(b.power_av));
  CHECK(a.fpr == doctest::Approx(b.fpr));
  CHECK(a.se_power == doctest::Approx(b.se_power));
  CHECK(a.fpr <= a.size);
}

TEST_CASE("table layouts") {
  const auto t1 = table1_rows();
  REQUIRE(t1.size() == 16);
  CHECK(t1[0].splits == SplitScheme::TwoSplitLOO);
  CHECK(t1[8].splits == SplitScheme::TriSplit);
  CHECK(t1[3].kind == ModelKind::D);
  CHECK(t1[3].p == 10);
  CHECK(t1[7].n == 1000);
  CHECK(table2_rows().size() == 8);
  TableRowSpec big{SplitScheme::TriSplit, 100, 1000, ModelKind::B};
  CHECK(replicates_for(big, 1000, false) == 200);
  CHECK(replicates_for(big, 20, false) == 10);
  CHECK(replicates_for(big, 1000, true) == 1000);
  CHECK(replicates_for(t1[0], 1000, false) == 1000);
}

TEST_CASE("design seed is shared across procedures and differs across designs") {
  CellSpec a;
  a.model = SimModel::table_default(ModelKind::B, 100, 100);
  CellSpec b = a;
  b.procedure = Procedure::Marginal;
  CHECK(design_seed(1, a) == design_seed(1, b));
  CellSpec c = a;
  c.model.n = 101;
  CHECK(design_seed(1, a) != design_seed(1, c));
  CHECK(design_seed(1, a) != design_seed(2, a));
  CellSpec e = a;
  e.splits = SplitScheme::TwoSplitLOO;
  CHECK(design_seed(1, a) != design_seed(1, e));
}

TEST_CASE("run_cells does not depend on the thread count") {
  std::vector<CellSpec> cells;
  for (auto proc : {Procedure::Lasso, Procedure::Stepwise, Procedure::Marginal}) {
    CellSpec c;
    c.model = SimModel::table_default(ModelKind::B, 60, 40);
    c.procedure = proc;
    c.replicates = 12;
    cells.push_back(c);
  }
  const auto one = run_cells(cells, 77, 1);
  const auto many = run_cells(cells, 77, 4);
  REQUIRE(one.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(one[k].row.size == many[k].row.size);
    CHECK(one[k].row.power_av == many[k].row.power_av);
    CHECK(one[k].row.fpr == many[k].row.fpr);
    CHECK(one[k].row.replicates == 12);
    CHECK(one[k].failures.empty());
    CHECK(one[k].row.power_av > 0.05);
  }
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 3, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  parallel_for(0, 2, [&](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("small table runs") {
  const auto rows = std::vector<TableRowSpec>{{SplitScheme::TriSplit, 60, 30, ModelKind::A}};
  const auto t1 = run_table1(rows, 10, 1, 1);
  REQUIRE(t1.size() == 1);
  for (const auto& m : t1[0].method) {
    CHECK(m.replicates == 10);
    CHECK(m.power_av == 0);
  }
  const auto t2 = run_table2({{SplitScheme::TriSplit, 60, 10, ModelKind::B}}, 3, 1, 1);
  REQUIRE(t2.size() == 1);
  CHECK(t2[0].row.replicates + t2[0].row.failures == 3);
}
