#pragma once

#include "screenclean/cleaner.hpp"
#include "screenclean/core.hpp"
#include "screenclean/pipeline.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace screenclean {

enum class ModelKind { A, B, C, D };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Simulation designs. A: null; B: beta_j = delta (10 - j) for j <= 10 with
/// iid covariates; C: as B with an AR(1) chain X_{j+1} = rho X_j + sqrt(1-rho^2) e;
/// D: p = 10, beta_1 = -beta_2 = 10 with X2, X3 built from X1 and X4 from X2.
struct SimModel {
  ModelKind kind = ModelKind::B;
  Index n = 100;
  Index p = 100;
  double delta = 0.5;
  double rho = 0.5;
  double tau = 0.01;
  double sigma = 1.0;

  /// Defaults used by the published tables: delta 0.5 at p = 100, 1.5 at
  /// p = 1000; rho 0.5 for C; rho 0.95, tau 0.01 for D.
  static SimModel table_default(ModelKind kind, Index n, Index p);
};

Eigen::VectorXd true_beta(const SimModel& model);

struct SimDraw {
  Dataset raw;
  Dataset standardized;
  TrueModel truth;
};

/// Y = X beta + sigma * eps, eps iid N(0, 1). Pure in (model, seed).
SimDraw generate(const SimModel& model, std::uint64_t seed);

/// Loading matrix L with X = L e for e iid N(0, I); row j expresses column j.
Eigen::MatrixXd covariate_loadings(const SimModel& model);

/// Cov(X) = L L^T computed from the generating equations.
Eigen::MatrixXd population_covariance(const SimModel& model);

/// Gamma = E(Z Z^T) for Z = (Y, X_1..X_p).
Eigen::MatrixXd population_gamma(const SimModel& model);

/// Population marginal coefficients of the standardized covariates:
/// Cov(X_j, Y) / sd(X_j).
Eigen::VectorXd population_marginal(const SimModel& model);

/// mu_j = beta_j + sum_{k in D, k != j} beta_k rho_kj for a correlation matrix.
Eigen::VectorXd marginal_means_from_correlation(const Eigen::VectorXd& beta, const Eigen::MatrixXd& corr);

// ---------------------------------------------------------------------------
// Metrics

struct ReplicateOutcome {
  IndexSet d_hat;
  std::optional<IndexSet> s_hat;
};

struct ReportRow {
  /// Fraction of replicates with a false positive.
  double size = 0;
  /// (1/s) sum_{j in D} P(j in D_hat); 0 when s = 0.
  double power_av = 0;
  /// Mean over replicates of |D_hat \ D| / (p - s).
  double fpr = 0;
  /// Fraction with D_hat ⊆ D ⊆ S_hat; NaN when S_hat was not recorded.
  double coverage = 0;
  double se_size = 0;
  double se_power = 0;
  double se_fpr = 0;
  double se_coverage = 0;
  Index replicates = 0;
  Index failures = 0;
  std::uint64_t seed = 0;
};

ReportRow metrics(const std::vector<ReplicateOutcome>& outcomes, const IndexSet& support, Index p);

// ---------------------------------------------------------------------------
// Experiment runner

enum class Procedure { Lasso, Stepwise, Marginal, AdaptiveLasso };

std::string to_string(Procedure proc);

struct CellSpec {
  SimModel model;
  Procedure procedure = Procedure::Lasso;
  SplitScheme splits = SplitScheme::TriSplit;
  double alpha = 0.05;
  Index replicates = 1000;
  QuantileFamily family = QuantileFamily::Normal;
};

struct CellResult {
  CellSpec spec;
  ReportRow row;
  std::vector<std::string> failures;
};

/// Seed shared by every procedure on the same (splits, model) design, so the
/// procedures of one table row see identical datasets.
std::uint64_t design_seed(std::uint64_t master, const CellSpec& spec);

/// Runs every replicate of every cell. Per-replicate seeds are fixed before
/// scheduling, so results do not depend on `threads`. Failures are recorded
/// per cell and excluded from the rates.
std::vector<CellResult> run_cells(const std::vector<CellSpec>& cells, std::uint64_t master_seed,
                                  unsigned threads = 1);

/// Calls body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

struct TableRowSpec {
  SplitScheme splits = SplitScheme::TriSplit;
  Index n = 100;
  Index p = 100;
  ModelKind kind = ModelKind::B;
};

/// The 16 rows of the screen-and-clean table (two-split LOO block, then three-split).
std::vector<TableRowSpec> table1_rows();
/// The 8 rows of the adaptive lasso table.
std::vector<TableRowSpec> table2_rows();

/// Replicate count for a row: `replicates`, reduced to `replicates / 5` (at
/// least 10) when p >= 1000 unless `full_large_p` is set.
Index replicates_for(const TableRowSpec& row, Index replicates, bool full_large_p);

struct Table1Row {
  TableRowSpec spec;
  /// Lasso, stepwise, marginal.
  ReportRow method[3];
};

struct Table2Row {
  TableRowSpec spec;
  ReportRow row;
};

std::vector<Table1Row> run_table1(const std::vector<TableRowSpec>& rows, Index replicates,
                                  std::uint64_t master_seed, unsigned threads, bool full_large_p = false);
std::vector<Table2Row> run_table2(const std::vector<TableRowSpec>& rows, Index replicates,
                                  std::uint64_t master_seed, unsigned threads, bool full_large_p = false);

}  // namespace screenclean
