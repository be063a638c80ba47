#pragma once

#include "screenclean/core.hpp"
#include "screenclean/distributions.hpp"

#include <cmath>
#include <limits>

namespace screenclean {

/// Which reference distribution the Bonferroni critical value is taken from.
enum class QuantileFamily { Normal, StudentT };

/// z_{alpha/(2m)}: two-sided Bonferroni over the m screened variables. With
/// `StudentT` the t quantile with `df` degrees of freedom is used instead.
double critical_trisplit(double alpha, Index m, QuantileFamily family = QuantileFamily::Normal,
                         Index df = 0);

/// log(log n) * sqrt(2 k_n log(2 p_n)) / alpha, natural logs. Valid when
/// screening, selection and cleaning share data.
double critical_twosplit(double alpha, Index n, Index k_n, Index p_n);

struct CleanOptions {
  double alpha = 0.05;
  /// TriSplit: Bonferroni normal quantile. TwoSplit: the conservative constant.
  SplitMode mode = SplitMode::TriSplit;
  QuantileFamily family = QuantileFamily::Normal;
  /// Total sample size, k_n and p_n, used only by the TwoSplit constant.
  Index n = 0;
  Index k_n = 0;
  Index p_n = 0;
};

struct CleanResult {
  IndexSet s_hat;
  IndexSet d_hat;
  /// Aligned with s_hat.
  Eigen::VectorXd coefficients;
  Eigen::VectorXd t_values;
  double critical = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.05;
  SplitMode mode = SplitMode::TriSplit;
  /// Zero residual variance on the cleaning data: every screened variable is
  /// retained and t-values are reported as +-infinity.
  bool perfect_fit = false;
};

/// D_hat = {j in S_hat : |T_j| > c}, from a least-squares fit on cleaning data.
CleanResult clean(const OlsFit& fit, const CleanOptions& options);

/// Cleaning rule applied to precomputed t-values (aligned with `s_hat`).
CleanResult clean_t_values(const IndexSet& s_hat, const Eigen::VectorXd& t_values,
                           const CleanOptions& options, Index df = 0);

struct Sandwich {
  IndexSet lower;
  IndexSet upper;
};

inline Sandwich sandwich(const CleanResult& result) { return {result.d_hat, result.s_hat}; }

/// lower ⊆ support ⊆ upper
inline bool covers(const Sandwich& s, const IndexSet& support) {
  return is_subset(s.lower, support) && is_subset(support, s.upper);
}

}  // namespace screenclean
