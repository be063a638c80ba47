#include "screenclean/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace screenclean {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::A: return "A";
    case ModelKind::B: return "B";
    case ModelKind::C: return "C";
    case ModelKind::D: return "D";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "A" || name == "a") return ModelKind::A;
  if (name == "B" || name == "b") return ModelKind::B;
  if (name == "C" || name == "c") return ModelKind::C;
  if (name == "D" || name == "d") return ModelKind::D;
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + name + "'");
}

std::string to_string(Procedure proc) {
  switch (proc) {
    case Procedure::Lasso: return "lasso";
    case Procedure::Stepwise: return "stepwise";
    case Procedure::Marginal: return "marginal";
    case Procedure::AdaptiveLasso: return "adaptive-lasso";
  }
  return "?";
}

SimModel SimModel::table_default(ModelKind kind, Index n, Index p) {
  SimModel m;
  m.kind = kind;
  m.n = n;
  m.p = p;
  m.delta = p >= 1000 ? 1.5 : 0.5;
  m.rho = kind == ModelKind::D ? 0.95 : 0.5;
  m.tau = 0.01;
  m.sigma = 1.0;
  return m;
}

namespace {

void validate(const SimModel& model) {
  if (model.n < 1 || model.p < 1) throw Error(ErrorKind::InvalidArgument, "model needs n, p >= 1");
  if (model.kind == ModelKind::D && model.p < 4) {
    throw Error(ErrorKind::InvalidArgument, "model D needs p >= 4");
  }
  if (model.kind == ModelKind::C && !(std::abs(model.rho) < 1)) {
    throw Error(ErrorKind::InvalidArgument, "model C needs |rho| < 1");
  }
  if (!(model.sigma >= 0)) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
}

}  // namespace

Eigen::VectorXd true_beta(const SimModel& model) {
  validate(model);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(model.p);
  switch (model.kind) {
    case ModelKind::A:
      break;
    case ModelKind::B:
    case ModelKind::C:
      // beta_j = delta (10 - j), j = 1..10 (so beta_10 = 0)
      for (Index j = 0; j < std::min<Index>(10, model.p); ++j) beta(j) = model.delta * static_cast<double>(9 - j);
      break;
    case ModelKind::D:
      beta(0) = 10.0;
      beta(1) = -10.0;
      break;
  }
  return beta;
}

SimDraw generate(const SimModel& model, std::uint64_t seed) {
  validate(model);
  const Index n = model.n;
  const Index p = model.p;
  Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  auto fill_normal = [&](Index j) {
    for (Index i = 0; i < n; ++i) x(i, j) = rng.normal();
  };
  auto innovate = [&](Index j, Index from, double rho, double scale) {
    for (Index i = 0; i < n; ++i) x(i, j) = rho * x(i, from) + scale * rng.normal();
  };

  switch (model.kind) {
    case ModelKind::A:
    case ModelKind::B:
      for (Index j = 0; j < p; ++j) fill_normal(j);
      break;
    case ModelKind::C: {
      const double scale = std::sqrt(1 - model.rho * model.rho);
      fill_normal(0);
      for (Index j = 1; j < p; ++j) innovate(j, j - 1, model.rho, scale);
      break;
    }
    case ModelKind::D:
      fill_normal(0);
      innovate(1, 0, model.rho, model.tau);
      innovate(2, 0, model.rho, model.tau);
      innovate(3, 1, model.rho, model.tau);
      for (Index j = 4; j < p; ++j) fill_normal(j);
      break;
  }

  Eigen::VectorXd beta = true_beta(model);
  Eigen::VectorXd y = x * beta;
  for (Index i = 0; i < n; ++i) y(i) += model.sigma * rng.normal();

  Dataset raw(std::move(y), std::move(x));
  Dataset standardized = standardize(raw);
  return {std::move(raw), std::move(standardized), TrueModel::from_beta(std::move(beta), model.sigma)};
}

Eigen::MatrixXd covariate_loadings(const SimModel& model) {
  validate(model);
  const Index p = model.p;
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(p, p);
  switch (model.kind) {
    case ModelKind::A:
    case ModelKind::B:
      break;
    case ModelKind::C: {
      const double scale = std::sqrt(1 - model.rho * model.rho);
      for (Index j = 1; j < p; ++j) {
        l.row(j) = model.rho * l.row(j - 1);
        l(j, j) = scale;
      }
      break;
    }
    case ModelKind::D:
      l.row(1) = model.rho * l.row(0);
      l(1, 1) = model.tau;
      l.row(2) = model.rho * l.row(0);
      l(2, 2) = model.tau;
      l.row(3) = model.rho * l.row(1);
      l(3, 3) = model.tau;
      break;
  }
  return l;
}

Eigen::MatrixXd population_covariance(const SimModel& model) {
  const Eigen::MatrixXd l = covariate_loadings(model);
  return l * l.transpose();
}

Eigen::MatrixXd population_gamma(const SimModel& model) {
  const Eigen::MatrixXd sigma = population_covariance(model);
  const Eigen::VectorXd beta = true_beta(model);
  const Index p = model.p;
  const Eigen::VectorXd cross = sigma * beta;
  Eigen::MatrixXd gamma(p + 1, p + 1);
  gamma(0, 0) = beta.dot(cross) + model.sigma * model.sigma;
  gamma.block(1, 0, p, 1) = cross;
  gamma.block(0, 1, 1, p) = cross.transpose();
  gamma.block(1, 1, p, p) = sigma;
  return gamma;
}

Eigen::VectorXd population_marginal(const SimModel& model) {
  const Eigen::MatrixXd sigma = population_covariance(model);
  const Eigen::VectorXd cross = sigma * true_beta(model);
  return (cross.array() / sigma.diagonal().array().sqrt()).matrix();
}

Eigen::VectorXd marginal_means_from_correlation(const Eigen::VectorXd& beta, const Eigen::MatrixXd& corr) {
  if (corr.rows() != beta.size() || corr.cols() != beta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "correlation matrix does not match beta");
  }
  Eigen::VectorXd mu = beta;
  for (Index j = 0; j < beta.size(); ++j) {
    for (Index k = 0; k < beta.size(); ++k) {
      if (k != j && beta(k) != 0) mu(j) += beta(k) * corr(k, j);
    }
  }
  return mu;
}

// ---------------------------------------------------------------------------

ReportRow metrics(const std::vector<ReplicateOutcome>& outcomes, const IndexSet& support, Index p) {
  ReportRow row;
  const auto reps = static_cast<Index>(outcomes.size());
  row.replicates = reps;
  if (reps == 0) {
    row.size = row.power_av = row.fpr = row.coverage = std::nan("");
    return row;
  }
  const auto s = static_cast<Index>(support.size());
  const double nulls = static_cast<double>(p - s);
  double size_hits = 0, covered = 0;
  double power_sum = 0, power_sq = 0, fpr_sum = 0, fpr_sq = 0;
  bool have_s_hat = true;
  for (const auto& o : outcomes) {
    const IndexSet false_pos = set_difference(o.d_hat, support);
    if (!false_pos.empty()) size_hits += 1;
    const double f = nulls > 0 ? static_cast<double>(false_pos.size()) / nulls : 0.0;
    fpr_sum += f;
    fpr_sq += f * f;
    if (s > 0) {
      const double hits = static_cast<double>(o.d_hat.size() - false_pos.size());
      const double pw = hits / static_cast<double>(s);
      power_sum += pw;
      power_sq += pw * pw;
    }
    if (o.s_hat) {
      covered += covers({o.d_hat, *o.s_hat}, support) ? 1 : 0;
    } else {
      have_s_hat = false;
    }
  }
  const double r = static_cast<double>(reps);
  auto binomial_se = [r](double rate) { return std::sqrt(std::max(0.0, rate * (1 - rate)) / r); };
  auto mean_se = [r](double sum, double sq) {
    if (r < 2) return 0.0;
    const double mean = sum / r;
    const double var = std::max(0.0, (sq - r * mean * mean) / (r - 1));
    return std::sqrt(var / r);
  };
  row.size = size_hits / r;
  row.se_size = binomial_se(row.size);
  row.power_av = s > 0 ? power_sum / r : 0.0;
  row.se_power = s > 0 ? mean_se(power_sum, power_sq) : 0.0;
  row.fpr = fpr_sum / r;
  row.se_fpr = mean_se(fpr_sum, fpr_sq);
  if (have_s_hat) {
    row.coverage = covered / r;
    row.se_coverage = binomial_se(row.coverage);
  } else {
    row.coverage = row.se_coverage = std::nan("");
  }
  return row;
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ScreenMethod screen_method_of(Procedure proc) {
  switch (proc) {
    case Procedure::Lasso: return ScreenMethod::Lasso;
    case Procedure::Stepwise: return ScreenMethod::Stepwise;
    case Procedure::Marginal: return ScreenMethod::Marginal;
    case Procedure::AdaptiveLasso: break;
  }
  throw Error(ErrorKind::InvalidArgument, "procedure has no screen method");
}

}  // namespace

std::uint64_t design_seed(std::uint64_t master, const CellSpec& spec) {
  std::ostringstream key;
  key.precision(17);
  key << (spec.procedure == Procedure::AdaptiveLasso ? std::string("adaptive") : to_string(spec.splits)) << '|'
      << spec.model.n << '|' << spec.model.p << '|' << to_string(spec.model.kind) << '|' << spec.model.delta
      << '|' << spec.model.rho << '|' << spec.model.tau << '|' << spec.model.sigma;
  return derive_seed(master, fnv1a(key.str()));
}

std::vector<CellResult> run_cells(const std::vector<CellSpec>& cells, std::uint64_t master_seed,
                                  unsigned threads) {
  struct Job {
    std::size_t cell;
    Index replicate;
  };
  std::vector<Job> jobs;
  std::vector<std::uint64_t> seeds;
  std::vector<TrueModel> truths;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    seeds.push_back(design_seed(master_seed, cells[c]));
    truths.push_back(TrueModel::from_beta(true_beta(cells[c].model), cells[c].model.sigma));
    for (Index r = 0; r < cells[c].replicates; ++r) jobs.push_back({c, r});
  }
  std::vector<std::optional<ReplicateOutcome>> outcomes(jobs.size());
  std::vector<std::string> errors(jobs.size());

  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const auto& job = jobs[k];
    const CellSpec& spec = cells[job.cell];
    const auto r = static_cast<std::uint64_t>(job.replicate);
    const std::uint64_t data_seed = derive_seed(seeds[job.cell], 2 * r);
    const std::uint64_t run_seed = derive_seed(seeds[job.cell], 2 * r + 1);
    try {
      const SimDraw draw = generate(spec.model, data_seed);
      ReplicateOutcome out;
      if (spec.procedure == Procedure::AdaptiveLasso) {
        CompetitorConfig cfg;
        cfg.seed = run_seed;
        out.d_hat = run_adaptive_lasso(draw.raw, cfg).selected;
      } else {
        PipelineConfig cfg;
        cfg.screener = screen_method_of(spec.procedure);
        cfg.splits = spec.splits;
        cfg.alpha = spec.alpha;
        cfg.family = spec.family;
        cfg.seed = run_seed;
        const auto result = run_screen_and_clean(draw.raw, cfg);
        out.d_hat = result.clean.d_hat;
        out.s_hat = result.clean.s_hat;
      }
      outcomes[k] = std::move(out);
    } catch (const Error& e) {
      errors[k] = "replicate " + std::to_string(job.replicate) + ": " + e.what();
    }
  });

  std::vector<CellResult> results(cells.size());
  std::vector<std::vector<ReplicateOutcome>> per_cell(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) results[c].spec = cells[c];
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::size_t c = jobs[k].cell;
    if (outcomes[k]) {
      per_cell[c].push_back(std::move(*outcomes[k]));
    } else {
      results[c].failures.push_back(errors[k]);
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    results[c].row = metrics(per_cell[c], truths[c].support, cells[c].model.p);
    results[c].row.failures = static_cast<Index>(results[c].failures.size());
    results[c].row.seed = seeds[c];
  }
  return results;
}

std::vector<TableRowSpec> table1_rows() {
  using enum ModelKind;
  std::vector<TableRowSpec> rows;
  for (SplitScheme s : {SplitScheme::TwoSplitLOO, SplitScheme::TriSplit}) {
    rows.push_back({s, 100, 100, A});
    rows.push_back({s, 100, 100, B});
    rows.push_back({s, 100, 100, C});
    rows.push_back({s, 100, 10, D});
    rows.push_back({s, 100, 1000, A});
    rows.push_back({s, 100, 1000, B});
    rows.push_back({s, 100, 1000, C});
    rows.push_back({s, 1000, 10, D});
  }
  return rows;
}

std::vector<TableRowSpec> table2_rows() {
  using enum ModelKind;
  const SplitScheme s = SplitScheme::TwoSplitLOO;
  return {{s, 100, 100, A},  {s, 100, 100, B},  {s, 100, 100, C},  {s, 100, 10, D},
          {s, 100, 1000, A}, {s, 100, 1000, B}, {s, 100, 1000, C}, {s, 1000, 10, D}};
}

Index replicates_for(const TableRowSpec& row, Index replicates, bool full_large_p) {
  if (row.p >= 1000 && !full_large_p) return std::max<Index>(10, replicates / 5);
  return replicates;
}

std::vector<Table1Row> run_table1(const std::vector<TableRowSpec>& rows, Index replicates,
                                  std::uint64_t master_seed, unsigned threads, bool full_large_p) {
  std::vector<CellSpec> cells;
  for (const auto& row : rows) {
    for (Procedure proc : {Procedure::Lasso, Procedure::Stepwise, Procedure::Marginal}) {
      CellSpec cell;
      cell.model = SimModel::table_default(row.kind, row.n, row.p);
      cell.procedure = proc;
      cell.splits = row.splits;
      cell.replicates = replicates_for(row, replicates, full_large_p);
      cells.push_back(cell);
    }
  }
  const auto results = run_cells(cells, master_seed, threads);
  std::vector<Table1Row> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Table1Row row;
    row.spec = rows[r];
    for (int m = 0; m < 3; ++m) row.method[m] = results[3 * r + static_cast<std::size_t>(m)].row;
    out.push_back(row);
  }
  return out;
}

std::vector<Table2Row> run_table2(const std::vector<TableRowSpec>& rows, Index replicates,
                                  std::uint64_t master_seed, unsigned threads, bool full_large_p) {
  std::vector<CellSpec> cells;
  for (const auto& row : rows) {
    CellSpec cell;
    cell.model = SimModel::table_default(row.kind, row.n, row.p);
    cell.procedure = Procedure::AdaptiveLasso;
    cell.replicates = replicates_for(row, replicates, full_large_p);
    cells.push_back(cell);
  }
  const auto results = run_cells(cells, master_seed, threads);
  std::vector<Table2Row> out;
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back({rows[r], results[r].row});
  return out;
}

}  // namespace screenclean
