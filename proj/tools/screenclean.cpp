// screenclean: analyze a dataset, run simulation cells, reproduce the tables,
// and run the persistence experiment.

#include "screenclean/io.hpp"
#include "screenclean/persistence.hpp"
#include "screenclean/pipeline.hpp"
#include "screenclean/simulation.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace screenclean;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct PipelineFlags {
  std::string screener = "lasso";
  std::string splits = "trisplit";
  double alpha = 0.05;
  std::string kn_rule = "sqrt";
  double kn_constant = 5.0;
  int grid = 100;
  std::string quantile = "normal";
  std::string loo_screening = "rescreen";

  void add(CLI::App* app) {
    app->add_option("--screener", screener, "lasso | stepwise | marginal")->capture_default_str();
    app->add_option("--splits", splits, "trisplit | twosplit-loo | twosplit-conservative")->capture_default_str();
    app->add_option("--alpha", alpha, "Family-wise level")->capture_default_str();
    app->add_option("--kn-rule", kn_rule, "Model size cap: sqrt (floor sqrt n) | alog (A log n)")
        ->capture_default_str();
    app->add_option("--kn-constant", kn_constant, "A in A log n")->capture_default_str();
    app->add_option("--grid", grid, "Lasso penalty grid size")->capture_default_str();
    app->add_option("--quantile", quantile, "Cleaning quantile: normal | t")->capture_default_str();
    app->add_option("--loo-screening", loo_screening, "Leave-one-out screening: rescreen | frozen")
        ->capture_default_str();
  }

  PipelineConfig config(std::uint64_t seed) const {
    PipelineConfig cfg;
    cfg.screener = parse_screen_method(screener);
    cfg.splits = parse_split_scheme(splits);
    cfg.alpha = alpha;
    cfg.kn_rule = parse_model_size_rule(kn_rule);
    cfg.kn_constant = kn_constant;
    cfg.seed = seed;
    cfg.lasso_grid = grid;
    if (quantile == "normal") {
      cfg.family = QuantileFamily::Normal;
    } else if (quantile == "t") {
      cfg.family = QuantileFamily::StudentT;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown quantile family '" + quantile + "'");
    }
    if (loo_screening == "rescreen") {
      cfg.loo_screening = LooScreening::Rescreen;
    } else if (loo_screening == "frozen") {
      cfg.loo_screening = LooScreening::FrozenSupports;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown leave-one-out screening '" + loo_screening + "'");
    }
    return cfg;
  }

  std::string canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << screener << '|' << splits << '|' << alpha << '|' << kn_rule << '|' << kn_constant << '|' << grid << '|'
      << quantile << '|' << loo_screening;
    return s.str();
  }
};

std::string join_path(const fs::path& dir, const char* name) { return (dir / name).string(); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

std::string set_string(const IndexSet& set, const Dataset& data) {
  std::string out = "{";
  for (std::size_t k = 0; k < set.size(); ++k) out += (k ? ", " : "") + data.name(set[k]);
  return out + "}";
}

// ---------------------------------------------------------------------------

struct AnalyzeCmd {
  std::string input;
  std::string out = "screenclean-report";
  std::uint64_t seed = 1;
  bool center_y = false;
  bool emit_intermediate = false;
  PipelineFlags flags;

  int run() const {
    Dataset data = [&] {
      try {
        return read_dataset_csv(input);
      } catch (const Error& e) {
        throw Error(e.kind(), std::string("input: ") + e.detail());
      }
    }();
    if (data.n() < 6) throw Error(ErrorKind::TooFewRows, "input: analysis needs n >= 6 rows");
    try {
      (void)standardize(data);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("input: ") + e.detail());
    }
    if (center_y) data = center_response(data);
    const PipelineConfig cfg = flags.config(seed);
    const PipelineResult result = run_screen_and_clean(data, cfg);

    const fs::path dir(out);
    ensure_dir(dir);
    const std::string prov = provenance_line(seed, flags.canonical() + "|" + (center_y ? "center" : "raw"));
    write_text(join_path(dir, "clean_table.csv"), clean_table_csv(result, data, prov));
    write_text(join_path(dir, "summary.json"), summary_json(result, data, cfg));
    if (emit_intermediate) {
      write_text(join_path(dir, "screen_path.csv"), screen_path_csv(result, prov));
      write_text(join_path(dir, "cv_curve.csv"), cv_curve_csv(result, prov));
    }

    std::cout << "screened  S_hat = " << set_string(result.clean.s_hat, data) << "\n";
    std::cout << "cleaned   D_hat = " << set_string(result.clean.d_hat, data) << "\n";
    std::cout << "k_n = " << result.k_n << ", chosen step " << result.chosen_index << " (lambda "
              << result.chosen_lambda << "), critical value " << result.clean.critical << "\n";
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "report written to " << dir.string() << "\n";
    return kExitOk;
  }
};

struct SimulateCmd {
  std::string model = "B";
  Index n = 100;
  Index p = 100;
  std::optional<double> delta;
  std::optional<double> rho;
  std::optional<double> tau;
  double sigma = 1.0;
  std::vector<std::string> procedures{"lasso"};
  Index replicates = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  PipelineFlags flags;

  int run() const {
    SimModel m = SimModel::table_default(parse_model_kind(model), n, p);
    if (delta) m.delta = *delta;
    if (rho) m.rho = *rho;
    if (tau) m.tau = *tau;
    m.sigma = sigma;
    if (replicates < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be >= 1");
    std::vector<CellSpec> cells;
    for (const auto& name : procedures) {
      CellSpec cell;
      cell.model = m;
      cell.splits = parse_split_scheme(flags.splits);
      cell.alpha = flags.alpha;
      cell.family = flags.config(seed).family;
      cell.replicates = replicates;
      if (name == "adaptive-lasso") {
        cell.procedure = Procedure::AdaptiveLasso;
      } else {
        const ScreenMethod method = parse_screen_method(name);
        cell.procedure = method == ScreenMethod::Lasso      ? Procedure::Lasso
                         : method == ScreenMethod::Stepwise ? Procedure::Stepwise
                                                            : Procedure::Marginal;
      }
      cells.push_back(cell);
    }
    const auto results = run_cells(cells, seed, threads);
    std::ostringstream canon;
    canon.precision(17);
    canon << model << '|' << n << '|' << p << '|' << m.delta << '|' << m.rho << '|' << m.tau << '|' << m.sigma
          << '|' << replicates << '|' << flags.splits << '|' << flags.alpha << '|' << flags.quantile;
    for (const auto& name : procedures) canon << '|' << name;
    const std::string csv = cells_csv(results, provenance_line(seed, canon.str()));
    if (out.empty()) {
      std::cout << csv;
    } else {
      write_text(out, csv);
    }
    for (const auto& r : results) {
      for (const auto& f : r.failures) std::cerr << "warning: " << to_string(r.spec.procedure) << " " << f << "\n";
    }
    return kExitOk;
  }
};

struct TablesCmd {
  int table = 1;
  Index replicates = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<std::string> cells;
  bool full_large_p = false;
  std::string out = ".";

  static std::string key(const TableRowSpec& row, bool with_splits) {
    std::string k = with_splits ? std::string(row.splits == SplitScheme::TriSplit ? "3" : "2") + "," : "";
    return k + std::to_string(row.n) + "," + std::to_string(row.p) + "," + to_string(row.kind);
  }

  static std::string normalize_filter(const std::string& text) {
    std::string out;
    for (char c : text) {
      if (c != ' ' && c != '\t') out += c;
    }
    return out;
  }

  std::vector<TableRowSpec> selected_rows() const {
    const bool with_splits = table == 1;
    const auto all = table == 1 ? table1_rows() : table2_rows();
    if (cells.empty()) return all;
    std::vector<TableRowSpec> rows;
    for (const auto& filter : cells) {
      const std::string f = normalize_filter(filter);
      bool found = false;
      for (const auto& row : all) {
        if (key(row, with_splits) == f) {
          rows.push_back(row);
          found = true;
        }
      }
      if (!found) {
        throw Error(ErrorKind::InvalidArgument,
                    "unknown cell '" + filter + "' for table " + std::to_string(table) +
                        (with_splits ? " (expected splits,n,p,model)" : " (expected n,p,model)"));
      }
    }
    return rows;
  }

  int run() const {
    if (table != 1 && table != 2) throw Error(ErrorKind::InvalidArgument, "--table must be 1 or 2");
    if (replicates < 10) throw Error(ErrorKind::InvalidArgument, "tables need --replicates >= 10");
    const auto rows = selected_rows();
    std::string canon = "table" + std::to_string(table) + "|" + std::to_string(replicates) + "|" +
                        (full_large_p ? "full" : "reduced");
    for (const auto& row : rows) canon += "|" + key(row, true);
    const std::string prov = provenance_line(seed, canon);
    const fs::path dir(out);
    ensure_dir(dir);
    if (table == 1) {
      const auto result = run_table1(rows, replicates, seed, threads, full_large_p);
      write_text(join_path(dir, "table1.csv"), table1_csv(result, prov));
      std::cout << "wrote " << (dir / "table1.csv").string() << " (" << result.size() << " rows)\n";
    } else {
      const auto result = run_table2(rows, replicates, seed, threads, full_large_p);
      write_text(join_path(dir, "table2.csv"), table2_csv(result, prov));
      std::cout << "wrote " << (dir / "table2.csv").string() << " (" << result.size() << " rows)\n";
    }
    return kExitOk;
  }
};

struct PersistenceCmd {
  PersistenceConfig cfg;
  unsigned threads = 1;
  std::string out = ".";

  int run() const {
    const PersistenceReport report = run_persistence(cfg, threads);
    std::ostringstream canon;
    canon.precision(17);
    for (Index n : cfg.ns) canon << n << ',';
    canon << '|' << cfg.replicates << '|' << cfg.p << '|' << cfg.delta << '|' << cfg.sigma << '|'
          << cfg.omega_exponent << '|' << cfg.grid;
    const std::string prov = provenance_line(cfg.seed, canon.str());
    const fs::path dir(out);
    ensure_dir(dir);
    write_text(join_path(dir, "persistence_curve.csv"), persistence_curve_csv(report, prov));
    write_text(join_path(dir, "persistence_summary.csv"), persistence_summary_csv(report, prov));
    std::cout << persistence_summary_csv(report, prov);
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screen-and-clean variable selection with error control"};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);

  AnalyzeCmd analyze;
  auto* a = app.add_subcommand("analyze", "Run screen, select and clean on a CSV dataset");
  a->add_option("input", analyze.input, "CSV with a header and a 'y' column")->required();
  a->add_option("-o,--out", analyze.out, "Report directory")->capture_default_str();
  a->add_option("--seed", analyze.seed, "Split seed")->capture_default_str();
  a->add_flag("--center-y", analyze.center_y, "Subtract the mean of y before fitting");
  a->add_flag("--emit-intermediate", analyze.emit_intermediate, "Also write screen_path.csv and cv_curve.csv");
  analyze.flags.add(a);

  SimulateCmd simulate;
  auto* s = app.add_subcommand("simulate", "Monte Carlo size/power for one design");
  s->add_option("--model", simulate.model, "A | B | C | D")->capture_default_str();
  s->add_option("-n,--n", simulate.n, "Total sample size")->capture_default_str();
  s->add_option("-p,--p", simulate.p, "Number of covariates")->capture_default_str();
  s->add_option("--delta", simulate.delta, "Signal step for B and C (default 0.5, 1.5 when p >= 1000)");
  s->add_option("--rho", simulate.rho, "Correlation parameter (C: 0.5, D: 0.95)");
  s->add_option("--tau", simulate.tau, "Innovation scale for D (0.01)");
  s->add_option("--sigma", simulate.sigma, "Noise s.d.")->capture_default_str();
  s->add_option("--procedure", simulate.procedures, "lasso, stepwise, marginal, adaptive-lasso (repeatable)")
      ->capture_default_str();
  s->add_option("--replicates", simulate.replicates, "Replicates")->capture_default_str();
  s->add_option("--seed", simulate.seed, "Master seed")->capture_default_str();
  s->add_option("--threads", simulate.threads, "Worker threads")->capture_default_str();
  s->add_option("-o,--out", simulate.out, "Output CSV (stdout if omitted)");
  s->add_option("--splits", simulate.flags.splits, "trisplit | twosplit-loo | twosplit-conservative")
      ->capture_default_str();
  s->add_option("--alpha", simulate.flags.alpha, "Family-wise level")->capture_default_str();
  s->add_option("--quantile", simulate.flags.quantile, "Cleaning quantile: normal | t")->capture_default_str();

  TablesCmd tables;
  auto* t = app.add_subcommand("tables", "Reproduce the size/power tables");
  t->add_option("--table", tables.table, "1 (screen and clean) or 2 (adaptive lasso)")->capture_default_str();
  t->add_option("--replicates", tables.replicates, "Replicates per cell")->capture_default_str();
  t->add_option("--seed", tables.seed, "Master seed")->capture_default_str();
  t->add_option("--threads", tables.threads, "Worker threads")->capture_default_str();
  t->add_option("--cells", tables.cells, "Row filter: \"splits,n,p,model\" (table 1) or \"n,p,model\" (table 2)");
  t->add_flag("--full-large-p", tables.full_large_p, "Use the full replicate count for p = 1000 rows");
  t->add_option("-o,--out", tables.out, "Output directory")->capture_default_str();

  PersistenceCmd persistence;
  auto* q = app.add_subcommand("persistence", "Cross-validated constrained lasso persistence experiment");
  q->add_option("--n", persistence.cfg.ns, "Sample sizes")->delimiter(',')->capture_default_str();
  q->add_option("--replicates", persistence.cfg.replicates, "Replicates per n")->capture_default_str();
  q->add_option("-p,--p", persistence.cfg.p, "Covariates")->capture_default_str();
  q->add_option("--delta", persistence.cfg.delta, "Triangle signal step")->capture_default_str();
  q->add_option("--sigma", persistence.cfg.sigma, "Noise s.d. (0 for noiseless)")->capture_default_str();
  q->add_option("--omega-exponent", persistence.cfg.omega_exponent, "Omega_n = n^e")->capture_default_str();
  q->add_option("--grid", persistence.cfg.grid, "Radius grid size")->capture_default_str();
  q->add_option("--seed", persistence.cfg.seed, "Master seed")->capture_default_str();
  q->add_option("--threads", persistence.threads, "Worker threads")->capture_default_str();
  q->add_option("-o,--out", persistence.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*a) return analyze.run();
    if (*s) return simulate.run();
    if (*t) return tables.run();
    if (*q) return persistence.run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_data_error(e.kind()) ? kExitInput : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
