#pragma once

#include "screenclean/core.hpp"
#include "screenclean/rng.hpp"

#include <vector>

namespace testing {

using screenclean::Index;

inline Eigen::MatrixXd gaussian_matrix(Index n, Index p, std::uint64_t seed) {
  screenclean::Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = rng.normal();
  }
  return x;
}

inline Eigen::VectorXd gaussian_vector(Index n, std::uint64_t seed) {
  screenclean::Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// Standardized Gaussian design with y = x beta + noise * eps.
inline screenclean::Dataset linear_data(Index n, const Eigen::VectorXd& beta, double noise, std::uint64_t seed) {
  screenclean::Dataset raw(Eigen::VectorXd::Zero(n), gaussian_matrix(n, beta.size(), seed));
  screenclean::Dataset std_data = screenclean::standardize(raw);
  Eigen::VectorXd y = std_data.x() * beta + noise * gaussian_vector(n, seed ^ 0x5555);
  return std_data.with_response(std::move(y));
}

/// Gaussian elimination with partial pivoting, written independently of Eigen's solvers.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    }
    a.row(k).swap(a.row(piv));
    std::swap(b(k), b(piv));
    for (Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (Index j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b(i) -= f * b(k);
    }
  }
  Eigen::VectorXd x(n);
  for (Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return x;
}

/// Normal-equation OLS on the columns `model` by explicit loops.
inline Eigen::VectorXd naive_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const std::vector<Index>& model) {
  const auto k = static_cast<Index>(model.size());
  Eigen::MatrixXd g(k, k);
  Eigen::VectorXd c(k);
  for (Index a = 0; a < k; ++a) {
    double s = 0;
    for (Index i = 0; i < x.rows(); ++i) s += x(i, model[a]) * y(i);
    c(a) = s;
    for (Index b = 0; b < k; ++b) {
      double t = 0;
      for (Index i = 0; i < x.rows(); ++i) t += x(i, model[a]) * x(i, model[b]);
      g(a, b) = t;
    }
  }
  return gauss_solve(g, c);
}

}  // namespace testing
