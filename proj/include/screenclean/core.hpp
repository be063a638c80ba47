#pragma once

#include "screenclean/error.hpp"
#include "screenclean/rng.hpp"
#include "screenclean/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace screenclean {

/// Response vector and covariate matrix. Immutable after construction.
///
/// No intercept is ever fitted; covariates are expected to be standardized
/// before screening (see `standardize`).
template <typename Scalar>
class BasicDataset {
 public:
  BasicDataset(Vector<Scalar> y, Matrix<Scalar> x, bool standardized = false,
               std::vector<std::string> names = {})
      : y_(std::move(y)), x_(std::move(x)), standardized_(standardized), names_(std::move(names)) {
    if (x_.rows() < 1 || x_.cols() < 1) {
      throw Error(ErrorKind::DimensionMismatch, "dataset needs n >= 1 and p >= 1");
    }
    if (y_.size() != x_.rows()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "response length " + std::to_string(y_.size()) + " != row count " +
                      std::to_string(x_.rows()));
    }
    if (!names_.empty() && static_cast<Index>(names_.size()) != x_.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "column name count does not match p");
    }
    if (standardized_) {
      const Scalar n = static_cast<Scalar>(x_.rows());
      for (Index j = 0; j < x_.cols(); ++j) {
        const Scalar mean = x_.col(j).mean();
        const Scalar var = (x_.col(j).array() - mean).square().sum() / n;
        if (std::abs(mean) > Scalar(1e-10) || std::abs(var - Scalar(1)) > Scalar(1e-8)) {
          throw Error(ErrorKind::InvalidArgument,
                      "column " + std::to_string(j) + " is flagged standardized but is not");
        }
      }
    }
  }

  const Vector<Scalar>& y() const { return y_; }
  const Matrix<Scalar>& x() const { return x_; }
  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }
  bool standardized() const { return standardized_; }

  std::string name(Index j) const {
    return names_.empty() ? "x" + std::to_string(j + 1) : names_[static_cast<std::size_t>(j)];
  }
  const std::vector<std::string>& names() const { return names_; }

  /// Row subset in the given order. The result is never flagged standardized.
  BasicDataset rows(std::span<const Index> indices) const {
    Vector<Scalar> y(static_cast<Index>(indices.size()));
    Matrix<Scalar> x(static_cast<Index>(indices.size()), p());
    for (std::size_t r = 0; r < indices.size(); ++r) {
      y(static_cast<Index>(r)) = y_(indices[r]);
      x.row(static_cast<Index>(r)) = x_.row(indices[r]);
    }
    return BasicDataset(std::move(y), std::move(x), false, names_);
  }

  /// Same data with every row except `row`.
  BasicDataset without_row(Index row) const {
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(n() - 1));
    for (Index i = 0; i < n(); ++i) {
      if (i != row) keep.push_back(i);
    }
    return rows(keep);
  }

  BasicDataset with_response(Vector<Scalar> y) const {
    return BasicDataset(std::move(y), x_, standardized_, names_);
  }

 private:
  Vector<Scalar> y_;
  Matrix<Scalar> x_;
  bool standardized_;
  std::vector<std::string> names_;
};

using Dataset = BasicDataset<double>;

/// Ground-truth coefficients for simulation work.
template <typename Scalar>
struct BasicTrueModel {
  Vector<Scalar> beta;
  IndexSet support;
  Index s = 0;
  /// min_{j in support} |beta_j|; NaN when the support is empty.
  Scalar psi = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar sigma = 1;

  static BasicTrueModel from_beta(Vector<Scalar> beta, Scalar sigma) {
    if (!(sigma >= 0)) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
    BasicTrueModel model;
    model.sigma = sigma;
    for (Index j = 0; j < beta.size(); ++j) {
      if (beta(j) != Scalar(0)) {
        model.support.push_back(j);
        const Scalar magnitude = std::abs(beta(j));
        model.psi = model.support.size() == 1 ? magnitude : std::min(model.psi, magnitude);
      }
    }
    model.s = static_cast<Index>(model.support.size());
    model.beta = std::move(beta);
    return model;
  }
};

using TrueModel = BasicTrueModel<double>;

/// Disjoint row groups covering {0, ..., n_total-1}.
struct SplitPlan {
  SplitMode mode = SplitMode::TriSplit;
  std::vector<IndexSet> groups;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct BasicOlsFit {
  IndexSet model;
  Vector<Scalar> coefficients;
  /// Residual s.d. with df = n - |M| degrees of freedom.
  Scalar sigma_hat = 0;
  /// (X_M^T X_M)^{-1}
  Matrix<Scalar> cov_scale;
  Index df = 0;
  Scalar rss = 0;
  Index n = 0;

  /// Coefficients scattered into a length-p vector.
  Vector<Scalar> full(Index p) const {
    Vector<Scalar> out = Vector<Scalar>::Zero(p);
    for (std::size_t k = 0; k < model.size(); ++k) out(model[k]) = coefficients(static_cast<Index>(k));
    return out;
  }
};

using OlsFit = BasicOlsFit<double>;

template <typename Scalar>
struct EigenExtremes {
  Scalar phi;
  Scalar Phi;
};

// ---------------------------------------------------------------------------
// Standardization and splitting

/// Centers each column and scales it to unit variance (denominator n).
template <typename Scalar>
BasicDataset<Scalar> standardize(const BasicDataset<Scalar>& raw) {
  const Index n = raw.n();
  Matrix<Scalar> x = raw.x();
  for (Index j = 0; j < x.cols(); ++j) {
    const Scalar mean = x.col(j).mean();
    x.col(j).array() -= mean;
    const Scalar var = x.col(j).squaredNorm() / static_cast<Scalar>(n);
    const Scalar floor = std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + mean * mean);
    if (!(var > floor)) {
      throw Error(ErrorKind::ConstantColumn,
                  "covariate " + std::to_string(j + 1) + " (" + raw.name(j) + ") has zero variance");
    }
    x.col(j) /= std::sqrt(var);
  }
  return BasicDataset<Scalar>(raw.y(), std::move(x), true, raw.names());
}

/// Random partition into three (TriSplit) or two (TwoSplit) groups whose sizes
/// differ by at most one; remainder rows go to the earlier groups.
SplitPlan split(Index n_total, SplitMode mode, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Least squares

namespace detail {

template <typename Scalar>
Scalar singular_threshold() {
  return Scalar(1e-10);
}

}  // namespace detail

/// Least squares of `y` on the columns `model` of `x`.
template <typename DerivedX, typename DerivedY>
BasicOlsFit<typename DerivedX::Scalar> ols_fit(const Eigen::MatrixBase<DerivedX>& x,
                                               const Eigen::MatrixBase<DerivedY>& y,
                                               const IndexSet& model) {
  using Scalar = typename DerivedX::Scalar;
  const Index n = x.rows();
  const Index k = static_cast<Index>(model.size());
  if (k >= n) {
    throw Error(ErrorKind::ModelTooLarge,
                "model size " + std::to_string(k) + " >= n = " + std::to_string(n));
  }
  BasicOlsFit<Scalar> fit;
  fit.model = model;
  fit.n = n;
  fit.df = n - k;
  if (k == 0) {
    fit.coefficients.resize(0);
    fit.cov_scale.resize(0, 0);
    fit.rss = y.squaredNorm();
    fit.sigma_hat = std::sqrt(fit.rss / static_cast<Scalar>(fit.df));
    return fit;
  }
  Matrix<Scalar> xm(n, k);
  for (Index c = 0; c < k; ++c) xm.col(c) = x.col(model[static_cast<std::size_t>(c)]);
  Matrix<Scalar> gram = xm.transpose() * xm;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram);
  const Vector<Scalar>& values = eig.eigenvalues();
  if (!(values(0) / static_cast<Scalar>(n) >= detail::singular_threshold<Scalar>())) {
    throw Error(ErrorKind::SingularGram, "smallest eigenvalue of X_M^T X_M / n is " +
                                             std::to_string(static_cast<double>(values(0) / n)));
  }
  const Matrix<Scalar>& vecs = eig.eigenvectors();
  fit.cov_scale = vecs * values.cwiseInverse().asDiagonal() * vecs.transpose();
  fit.coefficients = fit.cov_scale * (xm.transpose() * y);
  fit.rss = (y - xm * fit.coefficients).squaredNorm();
  fit.sigma_hat = std::sqrt(fit.rss / static_cast<Scalar>(fit.df));
  return fit;
}

template <typename Scalar>
BasicOlsFit<Scalar> ols_fit(const BasicDataset<Scalar>& data, const IndexSet& model) {
  return ols_fit(data.x(), data.y(), model);
}

/// T_j = coefficient_j / (sigma_hat * sqrt(cov_scale_jj)), one per model column.
template <typename Scalar>
Vector<Scalar> t_statistics(const BasicOlsFit<Scalar>& fit) {
  if (fit.df < 1) throw Error(ErrorKind::ModelTooLarge, "t-statistics need df >= 1");
  if (!(fit.sigma_hat > 0)) {
    throw Error(ErrorKind::ZeroResidualVariance, "perfect fit, t-statistics undefined");
  }
  return (fit.coefficients.array() / (fit.sigma_hat * fit.cov_scale.diagonal().array().sqrt()))
      .matrix();
}

// ---------------------------------------------------------------------------
// Eigenvalue diagnostics

template <typename Derived>
EigenExtremes<typename Derived::Scalar> eigen_extremes(const Eigen::MatrixBase<Derived>& gram) {
  using Scalar = typename Derived::Scalar;
  if (gram.rows() != gram.cols() || gram.rows() == 0) {
    throw Error(ErrorKind::NotSymmetric, "matrix is not square");
  }
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
    throw Error(ErrorKind::NotSymmetric, "asymmetry exceeds 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues()(0), eig.eigenvalues()(gram.rows() - 1)};
}

/// C(n, k) saturating at `cap + 1`.
std::uint64_t binomial_capped(Index n, Index k, std::uint64_t cap);

/// Calls `visit(const IndexSet&)` for every k-subset of {0..p-1} in
/// lexicographic order.
template <typename Visit>
void for_each_subset(Index p, Index k, Visit&& visit) {
  if (k < 0 || k > p) return;
  IndexSet subset(static_cast<std::size_t>(k));
  std::iota(subset.begin(), subset.end(), Index{0});
  while (true) {
    visit(static_cast<const IndexSet&>(subset));
    Index i = k - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == p - k + i) --i;
    if (i < 0) return;
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

inline constexpr std::uint64_t kMaxEnumeratedSubsets = 1'000'000;

/// Exact phi_n(k), Phi_n(k) by enumerating all size-k column subsets.
template <typename Scalar>
EigenExtremes<Scalar> restricted_eigen(const BasicDataset<Scalar>& data, Index k) {
  if (k < 1 || k > std::min(data.n(), data.p())) {
    throw Error(ErrorKind::InvalidArgument, "restricted_eigen needs 1 <= k <= min(n, p)");
  }
  if (binomial_capped(data.p(), k, kMaxEnumeratedSubsets) > kMaxEnumeratedSubsets) {
    throw Error(ErrorKind::TooManySubsets, "C(p, k) exceeds 1e6");
  }
  const Matrix<Scalar> sigma = data.x().transpose() * data.x() / static_cast<Scalar>(data.n());
  EigenExtremes<Scalar> out{std::numeric_limits<Scalar>::infinity(),
                            -std::numeric_limits<Scalar>::infinity()};
  Matrix<Scalar> sub(k, k);
  for_each_subset(data.p(), k, [&](const IndexSet& m) {
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) sub(a, b) = sigma(m[static_cast<std::size_t>(a)], m[static_cast<std::size_t>(b)]);
    }
    const auto ext = eigen_extremes(sub);
    out.phi = std::min(out.phi, ext.phi);
    out.Phi = std::max(out.Phi, ext.Phi);
  });
  return out;
}

/// Loss (beta_hat - beta)^T (X^T X / n) (beta_hat - beta).
template <typename Scalar>
Scalar prediction_loss(const Vector<Scalar>& beta_hat, const Vector<Scalar>& beta,
                       const BasicDataset<Scalar>& data) {
  if (beta_hat.size() != data.p() || beta.size() != data.p()) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient length does not match p");
  }
  return (data.x() * (beta_hat - beta)).squaredNorm() / static_cast<Scalar>(data.n());
}

template <typename Scalar>
struct LossBoundReport {
  Index m = 0;
  std::uint64_t models_evaluated = 0;
  /// Sup of the loss over models of size <= m containing the support (NaN if none).
  Scalar sup_loss_containing = std::numeric_limits<Scalar>::quiet_NaN();
  /// Inf of the loss over models of size <= m missing part of the support (NaN if none).
  Scalar inf_loss_missing = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar phi_m = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar phi_m_plus_s = std::numeric_limits<Scalar>::quiet_NaN();
  /// 4 m log p / (n phi_n(m))
  Scalar upper_bound = std::numeric_limits<Scalar>::quiet_NaN();
  /// psi^2 phi_n(m + s)
  Scalar lower_bound = std::numeric_limits<Scalar>::quiet_NaN();
  bool upper_violated = false;
  bool lower_violated = false;
};

/// Evaluates the least-squares loss of every model of size <= m and compares
/// the extremes with the restricted-eigenvalue loss bounds. Violations are
/// flagged, never thrown: the bounds only hold with probability tending to 1.
template <typename Scalar>
LossBoundReport<Scalar> check_loss_bounds(const BasicDataset<Scalar>& data,
                                          const BasicTrueModel<Scalar>& truth, Index m) {
  const Index p = data.p();
  const Index n = data.n();
  if (truth.beta.size() != p) throw Error(ErrorKind::DimensionMismatch, "beta length != p");
  if (m < 1 || m > std::min(n - 1, p)) {
    throw Error(ErrorKind::InvalidArgument, "check_loss_bounds needs 1 <= m < n and m <= p");
  }
  std::uint64_t total = 0;
  for (Index k = 0; k <= m; ++k) {
    total += binomial_capped(p, k, kMaxEnumeratedSubsets);
    if (total > kMaxEnumeratedSubsets) throw Error(ErrorKind::TooManySubsets, "too many models");
  }

  LossBoundReport<Scalar> report;
  report.m = m;
  const Matrix<Scalar> sigma = data.x().transpose() * data.x() / static_cast<Scalar>(n);
  auto loss_of = [&](const IndexSet& model) {
    const Vector<Scalar> diff = ols_fit(data, model).full(p) - truth.beta;
    return Scalar(diff.dot(sigma * diff));
  };
  for (Index k = 0; k <= m; ++k) {
    for_each_subset(p, k, [&](const IndexSet& model) {
      const Scalar loss = loss_of(model);
      ++report.models_evaluated;
      if (is_subset(truth.support, model)) {
        if (std::isnan(report.sup_loss_containing) || loss > report.sup_loss_containing) {
          report.sup_loss_containing = loss;
        }
      } else if (std::isnan(report.inf_loss_missing) || loss < report.inf_loss_missing) {
        report.inf_loss_missing = loss;
      }
    });
  }

  report.phi_m = restricted_eigen(data, m).phi;
  report.upper_bound = Scalar(4) * static_cast<Scalar>(m) * std::log(static_cast<Scalar>(p)) /
                       (static_cast<Scalar>(n) * report.phi_m);
  if (!std::isnan(report.sup_loss_containing)) {
    report.upper_violated = report.sup_loss_containing > report.upper_bound;
  }
  if (truth.s > 0 && m + truth.s <= std::min(n, p) &&
      binomial_capped(p, m + truth.s, kMaxEnumeratedSubsets) <= kMaxEnumeratedSubsets) {
    report.phi_m_plus_s = restricted_eigen(data, m + truth.s).phi;
    report.lower_bound = truth.psi * truth.psi * report.phi_m_plus_s;
    if (!std::isnan(report.inf_loss_missing)) {
      report.lower_violated = report.inf_loss_missing < report.lower_bound;
    }
  }
  return report;
}

}  // namespace screenclean
