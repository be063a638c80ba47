#pragma once

#include "screenclean/core.hpp"
#include "screenclean/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace screenclean {

/// Gamma = E(Z Z^T) for Z = (Y, X_1..X_p); R(beta) = gamma^T Gamma gamma with
/// gamma = (-1, beta).
template <typename Scalar>
class BasicRiskModel {
 public:
  explicit BasicRiskModel(Matrix<Scalar> gamma) : gamma_(std::move(gamma)) {
    if (gamma_.rows() != gamma_.cols() || gamma_.rows() < 2) {
      throw Error(ErrorKind::DimensionMismatch, "risk matrix must be square with p + 1 >= 2 rows");
    }
    const Scalar scale = std::max(Scalar(1), gamma_.cwiseAbs().maxCoeff());
    if ((gamma_ - gamma_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
      throw Error(ErrorKind::NotSymmetric, "risk matrix is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gamma_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -Scalar(1e-8) * scale) {
      throw Error(ErrorKind::DomainError, "risk matrix is not positive semidefinite");
    }
  }

  const Matrix<Scalar>& gamma() const { return gamma_; }
  Index p() const { return gamma_.rows() - 1; }

 private:
  Matrix<Scalar> gamma_;
};

using RiskModel = BasicRiskModel<double>;

/// Gamma_hat = n^-1 sum_i Z_i Z_i^T.
template <typename Scalar>
BasicRiskModel<Scalar> empirical_risk_model(const BasicDataset<Scalar>& data) {
  Matrix<Scalar> z(data.n(), data.p() + 1);
  z.col(0) = data.y();
  z.rightCols(data.p()) = data.x();
  Matrix<Scalar> gamma = z.transpose() * z / static_cast<Scalar>(data.n());
  gamma = (gamma + gamma.transpose()) / Scalar(2);
  return BasicRiskModel<Scalar>(std::move(gamma));
}

template <typename Derived>
typename Derived::Scalar predictive_risk(const Eigen::MatrixBase<Derived>& beta,
                                         const BasicRiskModel<typename Derived::Scalar>& risk) {
  using Scalar = typename Derived::Scalar;
  if (beta.size() != risk.p()) throw Error(ErrorKind::DimensionMismatch, "beta length != p of the risk model");
  Vector<Scalar> g(beta.size() + 1);
  g(0) = Scalar(-1);
  g.tail(beta.size()) = beta;
  return g.dot(risk.gamma() * g);
}

// ---------------------------------------------------------------------------
// Constrained lasso

/// Least squares over the l1 ball through the Gram matrix, so repeated solves
/// cost O(p^2) per sweep regardless of n.
template <typename Scalar>
class GramLasso {
 public:
  GramLasso(const Matrix<Scalar>& x, const Vector<Scalar>& y)
      : gram_(x.transpose() * x), cross_(x.transpose() * y), beta_(Vector<Scalar>::Zero(x.cols())),
        grad_(Vector<Scalar>::Zero(x.cols())) {
    if (y.size() != x.rows()) throw Error(ErrorKind::DimensionMismatch, "y length != rows of X");
    lambda_max_ = Scalar(2) * cross_.cwiseAbs().maxCoeff();
  }

  Scalar lambda_max() const { return lambda_max_; }
  const Matrix<Scalar>& gram() const { return gram_; }
  const Vector<Scalar>& cross() const { return cross_; }

  /// Minimizes ||y - X b||^2 + lambda ||b||_1, warm-started from the last call.
  /// `grad_` holds G b so each coordinate update is O(1) plus an O(p) refresh.
  const Vector<Scalar>& solve(Scalar lambda, double tolerance = 1e-12, int max_sweeps = 100000) {
    const Index p = gram_.rows();
    const Scalar half = lambda / Scalar(2);
    grad_ = gram_ * beta_;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      Scalar change = 0;
      for (Index j = 0; j < p; ++j) {
        const Scalar d = gram_(j, j);
        if (d <= Scalar(0)) continue;
        const Scalar z = cross_(j) - grad_(j) + d * beta_(j);
        const Scalar next = z > half ? (z - half) / d : (z < -half ? (z + half) / d : Scalar(0));
        const Scalar delta = next - beta_(j);
        if (delta != Scalar(0)) {
          grad_ += delta * gram_.col(j);
          beta_(j) = next;
          change = std::max(change, std::abs(delta));
        }
      }
      if (change <= static_cast<Scalar>(tolerance)) return beta_;
    }
    throw Error(ErrorKind::NoConvergence, "constrained lasso did not converge");
  }

 private:
  Matrix<Scalar> gram_;
  Vector<Scalar> cross_;
  Vector<Scalar> beta_;
  Vector<Scalar> grad_;
  Scalar lambda_max_ = 0;
};

/// argmin sum_i (y_i - x_i^T b)^2 subject to ||b||_1 <= omega. Returns the
/// least-squares fit when it already satisfies the constraint; otherwise
/// bisects log(lambda) until ||b||_1 lies in [omega (1 - rel_tol), omega].
template <typename Scalar>
Vector<Scalar> constrained_lasso(GramLasso<Scalar>& solver, Scalar omega, double rel_tol = 1e-4) {
  if (!(omega >= 0)) throw Error(ErrorKind::InvalidArgument, "omega must be >= 0");
  const Index p = solver.gram().rows();
  if (omega == Scalar(0) || solver.lambda_max() == Scalar(0)) return Vector<Scalar>::Zero(p);

  const Eigen::LDLT<Matrix<Scalar>> ldlt(solver.gram());
  const Scalar min_pivot = ldlt.vectorD().minCoeff();
  const Scalar max_pivot = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.info() == Eigen::Success && min_pivot > Scalar(1e-10) * max_pivot) {
    Vector<Scalar> ols = ldlt.solve(solver.cross());
    if (ols.template lpNorm<1>() <= omega) return ols;
  }

  double lo = std::log(static_cast<double>(solver.lambda_max()) * 1e-10);
  double hi = std::log(static_cast<double>(solver.lambda_max()));
  Vector<Scalar> beta = solver.solve(static_cast<Scalar>(std::exp(lo)));
  if (beta.template lpNorm<1>() <= omega) return beta;
  Vector<Scalar> feasible = Vector<Scalar>::Zero(p);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    beta = solver.solve(static_cast<Scalar>(std::exp(mid)));
    const Scalar norm = beta.template lpNorm<1>();
    if (norm > omega) {
      lo = mid;
    } else {
      feasible = beta;
      if (norm >= omega * Scalar(1 - rel_tol)) return feasible;
      hi = mid;
    }
    if (hi - lo < 1e-14) break;
  }
  return feasible;
}

template <typename Scalar>
Vector<Scalar> constrained_lasso(const BasicDataset<Scalar>& data, Scalar omega, double rel_tol = 1e-4) {
  GramLasso<Scalar> solver(data.x(), data.y());
  return constrained_lasso(solver, omega, rel_tol);
}

/// Uniform radius grid on [0, omega_max].
std::vector<double> radius_grid(double omega_max, int size);

struct RadiusSelection {
  std::vector<double> radii;
  /// Constrained fits on the training split, one per radius.
  std::vector<Eigen::VectorXd> path;
  std::vector<double> heldout_mse;
  std::size_t chosen = 0;
  Eigen::VectorXd beta;
  double radius = 0;
};

/// Fits on `train` for each radius and picks the smallest held-out mean
/// squared error on `holdout`; ties go to the smaller radius.
RadiusSelection cv_radius_select(const Dataset& train, const Dataset& holdout, double omega_max, int grid);

/// R(chosen) - min_k R(path_k).
double persistence_gap(const Eigen::VectorXd& chosen, const std::vector<Eigen::VectorXd>& path,
                       const RiskModel& risk);

// ---------------------------------------------------------------------------
// Trend experiment

struct PersistenceConfig {
  std::vector<Index> ns{100, 400, 1600};
  Index replicates = 50;
  /// Model-B triangle design with a small delta so ||beta||_1 < n^(1/5) at n = 100.
  Index p = 20;
  double delta = 0.05;
  double sigma = 1.0;
  /// Omega_n = n^omega_exponent.
  double omega_exponent = 0.2;
  int grid = 50;
  std::uint64_t seed = 0;
};

struct PersistenceCurvePoint {
  Index n = 0;
  double radius = 0;
  /// Training-split risk gamma^T Gamma_hat gamma, averaged over replicates.
  double empirical_risk = 0;
  double population_risk = 0;
  double l1_norm = 0;
};

struct PersistenceSummary {
  Index n = 0;
  double omega = 0;
  double median_gap = 0;
  double mean_gap = 0;
  double max_gap = 0;
  double mean_radius = 0;
  Index replicates = 0;
};

struct PersistenceReport {
  std::vector<PersistenceSummary> summary;
  std::vector<PersistenceCurvePoint> curve;
  /// Per-n raw gaps, in replicate order.
  std::vector<std::vector<double>> gaps;
};

SimModel persistence_model(const PersistenceConfig& cfg, Index n);

PersistenceReport run_persistence(const PersistenceConfig& cfg, unsigned threads = 1);

}  // namespace screenclean
