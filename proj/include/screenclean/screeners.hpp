#pragma once

#include "screenclean/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace screenclean {

template <typename Scalar>
struct BasicScreenEntry {
  /// Penalty for the lasso, |mu|_(m) for marginal, the step count for stepwise.
  Scalar lambda = 0;
  IndexSet selected;
  /// Length p. Lasso: penalized fit; stepwise: least squares on `selected`;
  /// marginal: mu_hat on `selected`.
  Vector<Scalar> coefficients;
};

template <typename Scalar>
struct BasicScreenPath {
  ScreenMethod method = ScreenMethod::Lasso;
  Index k_n = 0;
  std::vector<BasicScreenEntry<Scalar>> entries;
};

using ScreenEntry = BasicScreenEntry<double>;
using ScreenPath = BasicScreenPath<double>;

template <typename Scalar>
struct BasicLassoSolution {
  Scalar lambda = 0;
  Vector<Scalar> beta;
  IndexSet active;
  /// sum_i (y_i - x_i^T beta)^2 + lambda * penalty(beta)
  Scalar objective = 0;
  int sweeps = 0;
  /// Max violation of the stationarity conditions 2 X_j^T r = lambda sign(beta_j).
  Scalar kkt_residual = 0;
  /// Largest objective increase seen between consecutive sweeps (0 when monotone).
  Scalar max_objective_increase = 0;
};

using LassoSolution = BasicLassoSolution<double>;

struct LassoOptions {
  /// Stop when a full sweep changes no coefficient by more than this.
  double tolerance = 1e-8;
  int max_sweeps = 10000;
};

/// Coordinate descent for sum_i (y_i - x_i^T b)^2 + lambda ||b||_1.
///
/// Holds the current coefficients and residual so successive `solve` calls
/// warm-start. Alternates full sweeps with sweeps over the nonzero set.
template <typename Scalar>
class LassoSolver {
 public:
  LassoSolver(const Matrix<Scalar>& x, const Vector<Scalar>& y, LassoOptions options = {})
      : x_(x), y_(y), options_(options), beta_(Vector<Scalar>::Zero(x.cols())), residual_(y),
        col_sq_(x.colwise().squaredNorm().transpose()) {
    if (y.size() != x.rows()) throw Error(ErrorKind::DimensionMismatch, "y length != rows of X");
  }

  const Vector<Scalar>& beta() const { return beta_; }
  const Vector<Scalar>& residual() const { return residual_; }

  void reset() {
    beta_.setZero();
    residual_ = y_;
  }

  /// Smallest lambda giving the all-zero solution: 2 max_j |X_j^T y|.
  Scalar lambda_max() const { return Scalar(2) * (x_.transpose() * y_).cwiseAbs().maxCoeff(); }

  BasicLassoSolution<Scalar> solve(Scalar lambda, bool compute_kkt = true) {
    if (!(lambda >= 0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
    const Scalar half = lambda / Scalar(2);
    const Index p = x_.cols();
    BasicLassoSolution<Scalar> out;
    out.lambda = lambda;

    Scalar previous = objective(lambda);
    auto track = [&] {
      const Scalar current = objective(lambda);
      out.max_objective_increase = std::max(out.max_objective_increase, current - previous);
      previous = current;
    };

    const Scalar tol = static_cast<Scalar>(options_.tolerance);
    std::vector<Index> active;
    while (true) {
      if (out.sweeps >= options_.max_sweeps) {
        throw Error(ErrorKind::NoConvergence,
                    "lasso did not converge in " + std::to_string(options_.max_sweeps) +
                        " sweeps (KKT residual " + std::to_string(double(kkt(lambda))) + ")");
      }
      Scalar change = 0;
      for (Index j = 0; j < p; ++j) change = std::max(change, update(j, half));
      ++out.sweeps;
      track();
      if (change <= tol) break;

      active.clear();
      for (Index j = 0; j < p; ++j) {
        if (beta_(j) != Scalar(0)) active.push_back(j);
      }
      while (out.sweeps < options_.max_sweeps) {
        Scalar inner = 0;
        for (Index j : active) inner = std::max(inner, update(j, half));
        ++out.sweeps;
        track();
        if (inner <= tol) break;
      }
    }

    out.beta = beta_;
    for (Index j = 0; j < p; ++j) {
      if (beta_(j) != Scalar(0)) out.active.push_back(j);
    }
    out.objective = objective(lambda);
    if (compute_kkt) out.kkt_residual = kkt(lambda);
    return out;
  }

  Scalar objective(Scalar lambda) const {
    return residual_.squaredNorm() + lambda * beta_.template lpNorm<1>();
  }

  /// Exact KKT residual from a freshly computed residual vector.
  Scalar kkt(Scalar lambda) const {
    const Vector<Scalar> grad = Scalar(2) * (x_.transpose() * (y_ - x_ * beta_));
    Scalar worst = 0;
    for (Index j = 0; j < grad.size(); ++j) {
      if (beta_(j) > 0) {
        worst = std::max(worst, std::abs(grad(j) - lambda));
      } else if (beta_(j) < 0) {
        worst = std::max(worst, std::abs(grad(j) + lambda));
      } else {
        worst = std::max(worst, std::abs(grad(j)) - lambda);
      }
    }
    return worst;
  }

 private:
  Scalar update(Index j, Scalar half) {
    const Scalar d = col_sq_(j);
    if (d == Scalar(0)) return 0;
    const Scalar old = beta_(j);
    const Scalar rho = x_.col(j).dot(residual_) + d * old;
    Scalar fresh = 0;
    if (rho > half) {
      fresh = (rho - half) / d;
    } else if (rho < -half) {
      fresh = (rho + half) / d;
    }
    const Scalar delta = fresh - old;
    if (delta != Scalar(0)) {
      residual_.noalias() -= delta * x_.col(j);
      beta_(j) = fresh;
    }
    return std::abs(delta);
  }

  const Matrix<Scalar>& x_;
  const Vector<Scalar>& y_;
  LassoOptions options_;
  Vector<Scalar> beta_;
  Vector<Scalar> residual_;
  Vector<Scalar> col_sq_;
};

template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar threshold) {
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0;
}

/// Lasso minimizer of sum_i (Y_i - X_i^T b)^2 + lambda ||b||_1 from a cold start.
template <typename Scalar>
BasicLassoSolution<Scalar> lasso_fit(const BasicDataset<Scalar>& data, Scalar lambda,
                                     LassoOptions options = {}) {
  LassoSolver<Scalar> solver(data.x(), data.y(), options);
  return solver.solve(lambda);
}

/// Log-spaced grid from lambda_max down to lambda_max * min_ratio.
template <typename Scalar>
std::vector<Scalar> lambda_grid(Scalar lambda_max, int grid_size, Scalar min_ratio = Scalar(1e-3)) {
  if (grid_size < 1) throw Error(ErrorKind::InvalidArgument, "grid_size must be >= 1");
  std::vector<Scalar> grid(static_cast<std::size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    const Scalar frac = grid_size == 1 ? Scalar(0) : Scalar(k) / Scalar(grid_size - 1);
    grid[static_cast<std::size_t>(k)] = lambda_max * std::pow(min_ratio, frac);
  }
  return grid;
}

/// Warm-started lasso path over `grid` (descending). Stops before the first
/// entry whose active set exceeds `k_n`; `max_entries` truncates the grid.
template <typename Scalar>
BasicScreenPath<Scalar> lasso_path_on_grid(const Matrix<Scalar>& x, const Vector<Scalar>& y,
                                           Index k_n, const std::vector<Scalar>& grid,
                                           LassoOptions options = {}) {
  if (k_n < 1) throw Error(ErrorKind::InvalidArgument, "k_n must be >= 1");
  BasicScreenPath<Scalar> path;
  path.method = ScreenMethod::Lasso;
  path.k_n = k_n;
  LassoSolver<Scalar> solver(x, y, options);
  for (Scalar lambda : grid) {
    auto sol = solver.solve(lambda, false);
    if (static_cast<Index>(sol.active.size()) > k_n) break;
    path.entries.push_back({lambda, std::move(sol.active), std::move(sol.beta)});
  }
  return path;
}

template <typename Scalar>
BasicScreenPath<Scalar> lasso_path(const BasicDataset<Scalar>& data, Index k_n, int grid_size = 100,
                                   LassoOptions options = {}) {
  LassoSolver<Scalar> probe(data.x(), data.y(), options);
  const Scalar lmax = probe.lambda_max();
  if (!(lmax > 0)) {
    // Y orthogonal to every column: the whole path is empty.
    BasicScreenPath<Scalar> path;
    path.method = ScreenMethod::Lasso;
    path.k_n = k_n;
    path.entries.push_back({Scalar(0), {}, Vector<Scalar>::Zero(data.p())});
    return path;
  }
  return lasso_path_on_grid(data.x(), data.y(), k_n, lambda_grid(lmax, grid_size), options);
}

/// Forward stepwise: add argmax_j |<X_j, Res>| / n, refit least squares,
/// update the residual; entries for 0..k_n steps. Ties go to the lowest index;
/// columns already in the model are not candidates.
template <typename DerivedX, typename DerivedY>
BasicScreenPath<typename DerivedX::Scalar> stepwise_path(const Eigen::MatrixBase<DerivedX>& x,
                                                         const Eigen::MatrixBase<DerivedY>& y,
                                                         Index k_n) {
  using Scalar = typename DerivedX::Scalar;
  const Index n = x.rows();
  const Index p = x.cols();
  if (k_n < 1) throw Error(ErrorKind::InvalidArgument, "k_n must be >= 1");
  if (k_n >= n) throw Error(ErrorKind::ModelTooLarge, "stepwise needs k_n < n");
  k_n = std::min(k_n, p);

  BasicScreenPath<Scalar> path;
  path.method = ScreenMethod::Stepwise;
  path.k_n = k_n;
  path.entries.push_back({Scalar(0), {}, Vector<Scalar>::Zero(p)});

  IndexSet selected;
  std::vector<char> in_model(static_cast<std::size_t>(p), 0);
  Vector<Scalar> residual = y;
  for (Index step = 1; step <= k_n; ++step) {
    const Vector<Scalar> mu = x.transpose() * residual / static_cast<Scalar>(n);
    Index best = -1;
    Scalar best_abs = -1;
    for (Index j = 0; j < p; ++j) {
      if (in_model[static_cast<std::size_t>(j)]) continue;
      if (std::abs(mu(j)) > best_abs) {
        best_abs = std::abs(mu(j));
        best = j;
      }
    }
    selected.insert(std::upper_bound(selected.begin(), selected.end(), best), best);
    in_model[static_cast<std::size_t>(best)] = 1;
    const auto fit = ols_fit(x, y, selected);
    Vector<Scalar> coef = fit.full(p);
    residual = y - x * coef;
    path.entries.push_back({static_cast<Scalar>(step), selected, std::move(coef)});
  }
  return path;
}

template <typename Scalar>
BasicScreenPath<Scalar> stepwise_path(const BasicDataset<Scalar>& data, Index k_n) {
  return stepwise_path(data.x(), data.y(), k_n);
}

/// Column order by decreasing |mu_hat_j|, ties to the lower index.
template <typename Scalar>
std::vector<Index> marginal_order(const Vector<Scalar>& mu) {
  std::vector<Index> order(static_cast<std::size_t>(mu.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(mu(a)) > std::abs(mu(b)); });
  return order;
}

/// Marginal regression screen: entry m keeps the top-m columns by
/// |mu_hat_j| = |<Y, X_j>| / n, for m = 0..k_n. Entry 0 is the empty model.
template <typename DerivedX, typename DerivedY>
BasicScreenPath<typename DerivedX::Scalar> marginal_path(const Eigen::MatrixBase<DerivedX>& x,
                                                         const Eigen::MatrixBase<DerivedY>& y,
                                                         Index k_n) {
  using Scalar = typename DerivedX::Scalar;
  const Index p = x.cols();
  if (k_n < 1 || k_n > p) throw Error(ErrorKind::InvalidArgument, "marginal screen needs 1 <= k_n <= p");
  const Vector<Scalar> mu = x.transpose() * y / static_cast<Scalar>(x.rows());
  const auto order = marginal_order(mu);

  BasicScreenPath<Scalar> path;
  path.method = ScreenMethod::Marginal;
  path.k_n = k_n;
  // Any lambda above max |mu_j| selects nothing.
  path.entries.push_back({std::numeric_limits<Scalar>::infinity(), {}, Vector<Scalar>::Zero(p)});
  IndexSet selected;
  Vector<Scalar> coef = Vector<Scalar>::Zero(p);
  for (Index m = 1; m <= k_n; ++m) {
    const Index j = order[static_cast<std::size_t>(m - 1)];
    selected.insert(std::upper_bound(selected.begin(), selected.end(), j), j);
    coef(j) = mu(j);
    path.entries.push_back({std::abs(mu(j)), selected, coef});
  }
  return path;
}

template <typename Scalar>
BasicScreenPath<Scalar> marginal_path(const BasicDataset<Scalar>& data, Index k_n) {
  return marginal_path(data.x(), data.y(), k_n);
}

template <typename Scalar>
BasicScreenPath<Scalar> screen(const BasicDataset<Scalar>& data, ScreenMethod method, Index k_n,
                               int grid_size = 100) {
  switch (method) {
    case ScreenMethod::Lasso: return lasso_path(data, k_n, grid_size);
    case ScreenMethod::Stepwise: return stepwise_path(data, k_n);
    case ScreenMethod::Marginal: return marginal_path(data, k_n);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown screen method");
}

/// Columns of `x` restricted to the pilot support and multiplied by |pilot_j|,
/// so a plain lasso on them is the adaptive lasso with weights 1/|pilot_j|.
template <typename Scalar>
struct AdaptiveDesign {
  IndexSet support;
  Vector<Scalar> scale;
  Matrix<Scalar> x;

  AdaptiveDesign(const Matrix<Scalar>& full, const Vector<Scalar>& pilot) {
    if (pilot.size() != full.cols()) throw Error(ErrorKind::DimensionMismatch, "pilot length != p");
    for (Index j = 0; j < pilot.size(); ++j) {
      if (pilot(j) != Scalar(0)) support.push_back(j);
    }
    if (support.empty()) throw Error(ErrorKind::EmptyPilot, "all pilot coefficients are zero");
    const Index k = static_cast<Index>(support.size());
    scale.resize(k);
    x.resize(full.rows(), k);
    for (Index c = 0; c < k; ++c) {
      scale(c) = std::abs(pilot(support[static_cast<std::size_t>(c)]));
      x.col(c) = full.col(support[static_cast<std::size_t>(c)]) * scale(c);
    }
  }

  /// Maps rescaled coefficients back to a length-p vector in original units.
  Vector<Scalar> expand(const Vector<Scalar>& scaled, Index p) const {
    Vector<Scalar> out = Vector<Scalar>::Zero(p);
    for (std::size_t c = 0; c < support.size(); ++c) {
      out(support[c]) = scaled(static_cast<Index>(c)) * scale(static_cast<Index>(c));
    }
    return out;
  }
};

/// Adaptive lasso: sum_i (Y_i - X_i^T b)^2 + lambda sum_j |b_j| / |pilot_j|.
/// Columns with pilot_j = 0 have infinite weight and are dropped up front.
template <typename Scalar>
BasicLassoSolution<Scalar> adaptive_lasso_fit(const BasicDataset<Scalar>& data,
                                              const Vector<Scalar>& pilot, Scalar lambda,
                                              LassoOptions options = {}) {
  const AdaptiveDesign<Scalar> design(data.x(), pilot);
  LassoSolver<Scalar> solver(design.x, data.y(), options);
  auto scaled = solver.solve(lambda);
  BasicLassoSolution<Scalar> out = scaled;
  out.beta = design.expand(scaled.beta, data.p());
  out.active.clear();
  for (Index c : scaled.active) out.active.push_back(design.support[static_cast<std::size_t>(c)]);
  return out;
}

}  // namespace screenclean
