#pragma once

#include "screenclean/core.hpp"
#include "screenclean/screeners.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace screenclean {

/// Least-squares refit of one screened model.
template <typename Scalar>
struct BasicRefitEntry {
  Index path_index = 0;
  Scalar lambda = 0;
  IndexSet support;
  /// Length p, zero outside `support`.
  Vector<Scalar> coefficients;
};

template <typename Scalar>
struct BasicRefitPath {
  std::vector<BasicRefitEntry<Scalar>> entries;
  /// Entries dropped because the refit failed (path index, reason).
  std::vector<std::pair<Index, std::string>> warnings;
};

using RefitEntry = BasicRefitEntry<double>;
using RefitPath = BasicRefitPath<double>;

struct CvPoint {
  Index path_index = 0;
  double lambda = 0;
  Index support_size = 0;
  double l_hat = 0;
};

template <typename Scalar>
struct BasicCvScore {
  Index path_index = 0;
  Scalar lambda = 0;
  /// Held-out (or leave-one-out) mean squared prediction error.
  Scalar l_hat = 0;
  IndexSet support;
  Vector<Scalar> coefficients;
};

template <typename Scalar>
struct BasicCvSelection {
  BasicCvScore<Scalar> best;
  std::vector<CvPoint> curve;
};

using CvScore = BasicCvScore<double>;
using CvSelection = BasicCvSelection<double>;

/// OLS refit of every path entry on `train`. The empty model maps to the zero
/// predictor; entries whose refit is singular or too large are dropped with a
/// warning record. Consecutive entries with the same support share one fit.
template <typename Scalar>
BasicRefitPath<Scalar> refit_on_path(const BasicDataset<Scalar>& train,
                                     const BasicScreenPath<Scalar>& path) {
  BasicRefitPath<Scalar> out;
  const IndexSet* last_support = nullptr;
  Vector<Scalar> last_coef;
  bool last_ok = false;
  std::string last_reason;
  for (std::size_t k = 0; k < path.entries.size(); ++k) {
    const auto& entry = path.entries[k];
    if (last_support == nullptr || *last_support != entry.selected) {
      try {
        last_coef = ols_fit(train, entry.selected).full(train.p());
        last_ok = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularGram && e.kind() != ErrorKind::ModelTooLarge) throw;
        last_ok = false;
        last_reason = e.what();
      }
      last_support = &entry.selected;
    }
    if (last_ok) {
      out.entries.push_back({static_cast<Index>(k), entry.lambda, entry.selected, last_coef});
    } else {
      out.warnings.emplace_back(static_cast<Index>(k), last_reason);
    }
  }
  return out;
}

namespace detail {

/// Running argmin with the parsimony tie rule: equal scores (to 1e-12
/// relative) prefer the smaller support, then the earlier path index.
class CvArgmin {
 public:
  bool offer(double score, Index support_size) {
    const double tol = 1e-12 * std::max(std::abs(score), std::abs(best_score_));
    const bool better = !has_best_ || score < best_score_ - tol ||
                        (std::abs(score - best_score_) <= tol && support_size < best_size_);
    if (better) {
      has_best_ = true;
      best_score_ = score;
      best_size_ = support_size;
    }
    return better;
  }

 private:
  bool has_best_ = false;
  double best_score_ = std::numeric_limits<double>::infinity();
  Index best_size_ = 0;
};

}  // namespace detail

/// Held-out selection: L_hat = mean_i (Y_i - X_i^T beta_hat(lambda))^2 over
/// `holdout`, minimized over the refit path.
template <typename Scalar>
BasicCvSelection<Scalar> cv_select(const BasicRefitPath<Scalar>& fits,
                                   const BasicDataset<Scalar>& holdout) {
  if (fits.entries.empty()) throw Error(ErrorKind::EmptyPath, "no candidate models to select from");
  BasicCvSelection<Scalar> out;
  detail::CvArgmin argmin;
  std::size_t winner = 0;
  for (std::size_t k = 0; k < fits.entries.size(); ++k) {
    const auto& entry = fits.entries[k];
    if (entry.coefficients.size() != holdout.p()) {
      throw Error(ErrorKind::DimensionMismatch, "refit length != holdout p");
    }
    const Scalar l_hat =
        (holdout.y() - holdout.x() * entry.coefficients).squaredNorm() / static_cast<Scalar>(holdout.n());
    const auto size = static_cast<Index>(entry.support.size());
    out.curve.push_back({entry.path_index, double(entry.lambda), size, double(l_hat)});
    if (argmin.offer(double(l_hat), size)) winner = k;
  }
  const auto& w = fits.entries[winner];
  out.best = {w.path_index, w.lambda, Scalar(out.curve[winner].l_hat), w.support, w.coefficients};
  return out;
}

enum class LooScreening {
  /// Re-run the screen inside each fold (lasso: on the frozen full-data grid).
  Rescreen,
  /// Keep the full-data supports and only refit per fold.
  FrozenSupports,
};

struct LooOptions {
  int grid_size = 100;
  LooScreening screening = LooScreening::Rescreen;
};

template <typename Scalar>
struct BasicLooSelection {
  BasicCvScore<Scalar> best;
  std::vector<CvPoint> curve;
  BasicScreenPath<Scalar> path;
};

using LooSelection = BasicLooSelection<double>;

namespace detail {

/// Squared error at a held-out row of the OLS refit of `support` on the fold;
/// a failed refit contributes the zero-predictor error.
template <typename Scalar>
Scalar loo_refit_error(const Matrix<Scalar>& x, const Vector<Scalar>& y, const IndexSet& support,
                       const Eigen::Ref<const Vector<Scalar>>& row, Scalar target) {
  if (support.empty()) return target * target;
  try {
    const auto fit = ols_fit(x, y, support);
    Scalar pred = 0;
    for (std::size_t c = 0; c < support.size(); ++c) {
      pred += row(support[c]) * fit.coefficients(static_cast<Index>(c));
    }
    return (target - pred) * (target - pred);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularGram && e.kind() != ErrorKind::ModelTooLarge) throw;
    return target * target;
  }
}

}  // namespace detail

/// Leave-one-out selection over a screen path built on the full data.
///
/// Candidate m is scored by the mean over rows i of the squared error at row i
/// of the candidate refit on the other n-1 rows. With `Rescreen`, stepwise and
/// marginal rescreen inside each fold; the lasso re-solves each fold on the
/// full-data lambda grid. The winner's full-data refit is returned.
template <typename Scalar>
BasicLooSelection<Scalar> loo_cv_select(const BasicDataset<Scalar>& data, ScreenMethod method,
                                        Index k_n, LooOptions options = {}) {
  const Index n = data.n();
  const Index p = data.p();
  if (n < 3) throw Error(ErrorKind::TooFewRows, "leave-one-out needs n >= 3");

  BasicLooSelection<Scalar> out;
  out.path = screen(data, method, k_n, options.grid_size);
  const auto& entries = out.path.entries;
  const std::size_t candidates = entries.size();
  std::vector<Scalar> sse(candidates, Scalar(0));

  Matrix<Scalar> fold_x(n - 1, p);
  Vector<Scalar> fold_y(n - 1);
  std::vector<Scalar> grid;
  for (const auto& e : entries) grid.push_back(e.lambda);

  for (Index i = 0; i < n; ++i) {
    if (i > 0) fold_x.topRows(i) = data.x().topRows(i);
    if (i < n - 1) fold_x.bottomRows(n - 1 - i) = data.x().bottomRows(n - 1 - i);
    if (i > 0) fold_y.head(i) = data.y().head(i);
    if (i < n - 1) fold_y.tail(n - 1 - i) = data.y().tail(n - 1 - i);
    const Eigen::Ref<const Vector<Scalar>> row = data.x().row(i).transpose();
    const Scalar target = data.y()(i);

    if (options.screening == LooScreening::FrozenSupports) {
      const IndexSet* prev = nullptr;
      Scalar prev_err = 0;
      for (std::size_t c = 0; c < candidates; ++c) {
        if (prev == nullptr || *prev != entries[c].selected) {
          prev_err = detail::loo_refit_error(fold_x, fold_y, entries[c].selected, row, target);
          prev = &entries[c].selected;
        }
        sse[c] += prev_err;
      }
      continue;
    }

    switch (method) {
      case ScreenMethod::Lasso: {
        LassoSolver<Scalar> solver(fold_x, fold_y);
        IndexSet prev;
        Scalar prev_err = 0;
        bool have_prev = false;
        for (std::size_t c = 0; c < candidates; ++c) {
          auto sol = solver.solve(grid[c], false);
          if (!have_prev || sol.active != prev) {
            prev_err = detail::loo_refit_error(fold_x, fold_y, sol.active, row, target);
            prev = std::move(sol.active);
            have_prev = true;
          }
          sse[c] += prev_err;
        }
        break;
      }
      case ScreenMethod::Stepwise: {
        // Steps beyond a singular refit inside the fold score as the zero predictor.
        std::size_t done = 0;
        try {
          const auto fold_path = stepwise_path(fold_x, fold_y, k_n);
          for (; done < candidates && done < fold_path.entries.size(); ++done) {
            const Scalar err = target - row.dot(fold_path.entries[done].coefficients);
            sse[done] += err * err;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::SingularGram && e.kind() != ErrorKind::ModelTooLarge) throw;
        }
        for (; done < candidates; ++done) sse[done] += target * target;
        break;
      }
      case ScreenMethod::Marginal: {
        const Vector<Scalar> mu = fold_x.transpose() * fold_y / static_cast<Scalar>(n - 1);
        const auto order = marginal_order(mu);
        IndexSet selected;
        sse[0] += target * target;
        for (std::size_t c = 1; c < candidates; ++c) {
          const Index j = order[c - 1];
          selected.insert(std::upper_bound(selected.begin(), selected.end(), j), j);
          sse[c] += detail::loo_refit_error(fold_x, fold_y, selected, row, target);
        }
        break;
      }
    }
  }

  detail::CvArgmin argmin;
  std::size_t winner = 0;
  for (std::size_t c = 0; c < candidates; ++c) {
    const Scalar score = sse[c] / static_cast<Scalar>(n);
    const auto size = static_cast<Index>(entries[c].selected.size());
    out.curve.push_back({static_cast<Index>(c), double(entries[c].lambda), size, double(score)});
    if (argmin.offer(double(score), size)) winner = c;
  }
  const auto& w = entries[winner];
  out.best.path_index = static_cast<Index>(winner);
  out.best.lambda = w.lambda;
  out.best.l_hat = Scalar(out.curve[winner].l_hat);
  out.best.support = w.selected;
  out.best.coefficients = ols_fit(data, w.selected).full(p);
  return out;
}

/// Leave-one-out choice of lambda for a plain lasso scored by its own
/// (penalized) predictions, as used by the adaptive-lasso competitor.
template <typename Scalar>
struct BasicLassoCv {
  Index grid_index = 0;
  Scalar lambda = 0;
  Scalar score = 0;
  std::vector<Scalar> grid;
  std::vector<Scalar> scores;
  /// Full-data fit at the chosen lambda.
  BasicLassoSolution<Scalar> solution;
  /// The grid was cut short where the solver ran out of sweeps.
  bool truncated = false;
};

using LassoCv = BasicLassoCv<double>;

template <typename Scalar>
BasicLassoCv<Scalar> loo_lasso_cv(const Matrix<Scalar>& x, const Vector<Scalar>& y, int grid_size = 100,
                                  Scalar min_ratio = Scalar(-1), LassoOptions options = {}) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (n < 3) throw Error(ErrorKind::TooFewRows, "leave-one-out needs n >= 3");
  BasicLassoCv<Scalar> out;
  LassoSolver<Scalar> full(x, y, options);
  const Scalar lmax = full.lambda_max();
  if (!(lmax > 0)) {
    out.grid = {Scalar(0)};
    out.scores = {y.squaredNorm() / static_cast<Scalar>(n)};
    out.score = out.scores[0];
    out.solution = full.solve(Scalar(0));
    return out;
  }
  // Default grid depth follows glmnet: 1e-2 lambda_max when n < p, else 1e-4.
  if (!(min_ratio > 0)) min_ratio = n < p ? Scalar(1e-2) : Scalar(1e-4);
  out.grid = lambda_grid(lmax, grid_size, min_ratio);
  out.scores.assign(out.grid.size(), Scalar(0));

  // Near-interpolating penalties (p > n) can exhaust the sweep budget; the
  // grid is then cut at the first such lambda for every fold alike.
  std::size_t limit = out.grid.size();
  auto truncate = [&](std::size_t c, const Error& e) {
    if (e.kind() != ErrorKind::NoConvergence) throw e;
    if (c == 0) throw e;
    limit = std::min(limit, c);
    out.truncated = true;
  };
  // The path also ends once the full-data fit explains 99.9% of the sum of
  // squares or the residual sum of squares stalls (glmnet's stopping rule).
  std::vector<BasicLassoSolution<Scalar>> path;
  const Scalar total = y.squaredNorm();
  Scalar previous_rss = total;
  for (std::size_t c = 0; c < limit; ++c) {
    try {
      path.push_back(full.solve(out.grid[c], false));
    } catch (const Error& e) {
      truncate(c, e);
      break;
    }
    const Scalar rss = full.residual().squaredNorm();
    if (rss < Scalar(1e-3) * total || (c > 0 && previous_rss - rss < Scalar(1e-5) * previous_rss)) {
      limit = c + 1;
      break;
    }
    previous_rss = rss;
  }

  Matrix<Scalar> fold_x(n - 1, p);
  Vector<Scalar> fold_y(n - 1);
  for (Index i = 0; i < n; ++i) {
    if (i > 0) fold_x.topRows(i) = x.topRows(i);
    if (i < n - 1) fold_x.bottomRows(n - 1 - i) = x.bottomRows(n - 1 - i);
    if (i > 0) fold_y.head(i) = y.head(i);
    if (i < n - 1) fold_y.tail(n - 1 - i) = y.tail(n - 1 - i);
    LassoSolver<Scalar> solver(fold_x, fold_y, options);
    for (std::size_t c = 0; c < limit; ++c) {
      try {
        solver.solve(out.grid[c], false);
      } catch (const Error& e) {
        truncate(c, e);
        break;
      }
      const Scalar err = y(i) - x.row(i).dot(solver.beta());
      out.scores[c] += err * err;
    }
  }
  out.grid.resize(limit);
  out.scores.resize(limit);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t c = 0; c < limit; ++c) {
    out.scores[c] /= static_cast<Scalar>(n);
    if (out.scores[c] < best) {
      best = out.scores[c];
      out.grid_index = static_cast<Index>(c);
    }
  }
  out.lambda = out.grid[static_cast<std::size_t>(out.grid_index)];
  out.score = best;
  out.solution = path[static_cast<std::size_t>(out.grid_index)];
  return out;
}

/// (1/n) ||X (beta_hat - beta)||^2 on `data`.
template <typename Scalar>
Scalar oracle_loss(const Vector<Scalar>& beta_hat, const BasicTrueModel<Scalar>& truth,
                   const BasicDataset<Scalar>& data) {
  return prediction_loss(beta_hat, truth.beta, data);
}

}  // namespace screenclean
