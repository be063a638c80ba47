#include "screenclean/persistence.hpp"

#include <algorithm>
#include <cmath>

namespace screenclean {

std::vector<double> radius_grid(double omega_max, int size) {
  if (size < 2) throw Error(ErrorKind::InvalidArgument, "radius grid needs >= 2 points");
  if (!(omega_max >= 0)) throw Error(ErrorKind::InvalidArgument, "omega_max must be >= 0");
  std::vector<double> radii(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) radii[static_cast<std::size_t>(k)] = omega_max * k / (size - 1);
  return radii;
}

RadiusSelection cv_radius_select(const Dataset& train, const Dataset& holdout, double omega_max, int grid) {
  if (train.p() != holdout.p()) throw Error(ErrorKind::DimensionMismatch, "splits have different p");
  RadiusSelection out;
  out.radii = radius_grid(omega_max, grid);
  GramLasso<double> solver(train.x(), train.y());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < out.radii.size(); ++k) {
    Eigen::VectorXd beta = constrained_lasso(solver, out.radii[k]);
    const double mse = (holdout.y() - holdout.x() * beta).squaredNorm() / static_cast<double>(holdout.n());
    out.heldout_mse.push_back(mse);
    if (mse < best) {
      best = mse;
      out.chosen = k;
    }
    out.path.push_back(std::move(beta));
  }
  out.beta = out.path[out.chosen];
  out.radius = out.radii[out.chosen];
  return out;
}

double persistence_gap(const Eigen::VectorXd& chosen, const std::vector<Eigen::VectorXd>& path,
                       const RiskModel& risk) {
  if (path.empty()) throw Error(ErrorKind::EmptyPath, "persistence gap needs a non-empty path");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : path) best = std::min(best, predictive_risk(b, risk));
  return predictive_risk(chosen, risk) - best;
}

SimModel persistence_model(const PersistenceConfig& cfg, Index n) {
  SimModel model;
  model.kind = ModelKind::B;
  model.n = n;
  model.p = cfg.p;
  model.delta = cfg.delta;
  model.sigma = cfg.sigma;
  return model;
}

PersistenceReport run_persistence(const PersistenceConfig& cfg, unsigned threads) {
  if (cfg.replicates < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be >= 1");
  PersistenceReport report;
  for (std::size_t t = 0; t < cfg.ns.size(); ++t) {
    const Index n = cfg.ns[t];
    if (n < 4) throw Error(ErrorKind::TooFewRows, "persistence experiment needs n >= 4");
    const SimModel model = persistence_model(cfg, n);
    const RiskModel population(population_gamma(model));
    const double omega = std::pow(static_cast<double>(n), cfg.omega_exponent);
    const std::uint64_t n_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n));
    const auto reps = static_cast<std::size_t>(cfg.replicates);
    const auto points = static_cast<std::size_t>(cfg.grid);

    std::vector<double> gaps(reps), radii(reps);
    std::vector<Eigen::ArrayXXd> curves(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
      const SimDraw draw = generate(model, derive_seed(n_seed, 2 * r));
      const SplitPlan plan = split(n, SplitMode::TwoSplit, derive_seed(n_seed, 2 * r + 1));
      const Dataset train = draw.raw.rows(plan.groups[0]);
      const Dataset holdout = draw.raw.rows(plan.groups[1]);
      const RadiusSelection sel = cv_radius_select(train, holdout, omega, cfg.grid);
      gaps[r] = persistence_gap(sel.beta, sel.path, population);
      radii[r] = sel.radius;
      const RiskModel empirical = empirical_risk_model(train);
      Eigen::ArrayXXd curve(static_cast<Index>(points), 3);
      for (std::size_t k = 0; k < points; ++k) {
        const auto row = static_cast<Index>(k);
        curve(row, 0) = predictive_risk(sel.path[k], empirical);
        curve(row, 1) = predictive_risk(sel.path[k], population);
        curve(row, 2) = sel.path[k].lpNorm<1>();
      }
      curves[r] = std::move(curve);
    });

    Eigen::ArrayXXd mean_curve = Eigen::ArrayXXd::Zero(static_cast<Index>(points), 3);
    for (const auto& c : curves) mean_curve += c;
    mean_curve /= static_cast<double>(reps);
    const auto radii_grid = radius_grid(omega, cfg.grid);
    for (std::size_t k = 0; k < points; ++k) {
      const auto row = static_cast<Index>(k);
      report.curve.push_back({n, radii_grid[k], mean_curve(row, 0), mean_curve(row, 1), mean_curve(row, 2)});
    }

    PersistenceSummary s;
    s.n = n;
    s.omega = omega;
    s.replicates = cfg.replicates;
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    s.median_gap = reps % 2 ? sorted[reps / 2] : 0.5 * (sorted[reps / 2 - 1] + sorted[reps / 2]);
    s.max_gap = sorted.back();
    for (double g : gaps) s.mean_gap += g / static_cast<double>(reps);
    for (double r : radii) s.mean_radius += r / static_cast<double>(reps);
    report.summary.push_back(s);
    report.gaps.push_back(std::move(gaps));
  }
  return report;
}

}  // namespace screenclean
