#include "screenclean/cleaner.hpp"

#include <string>

namespace screenclean {

double critical_trisplit(double alpha, Index m, QuantileFamily family, Index df) {
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0, 1)");
  if (m < 1) throw Error(ErrorKind::EmptyModel, "no screened variables to test");
  const double level = alpha / (2.0 * static_cast<double>(m));
  if (family == QuantileFamily::StudentT) {
    if (df < 1) throw Error(ErrorKind::DomainError, "t critical value needs df >= 1");
    return student_t_upper_quantile(level, static_cast<double>(df));
  }
  return normal_upper_quantile(level);
}

double critical_twosplit(double alpha, Index n, Index k_n, Index p_n) {
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0, 1)");
  if (k_n < 1 || p_n < 1) throw Error(ErrorKind::InvalidArgument, "k_n and p_n must be >= 1");
  const double loglog = n > 1 ? std::log(std::log(static_cast<double>(n))) : -1.0;
  if (!(loglog > 0)) {
    throw Error(ErrorKind::DomainError, "log log n <= 0 for n = " + std::to_string(n));
  }
  return loglog * std::sqrt(2.0 * static_cast<double>(k_n) * std::log(2.0 * static_cast<double>(p_n))) /
         alpha;
}

CleanResult clean_t_values(const IndexSet& s_hat, const Eigen::VectorXd& t_values,
                           const CleanOptions& options, Index df) {
  if (static_cast<Index>(s_hat.size()) != t_values.size()) {
    throw Error(ErrorKind::DimensionMismatch, "t-values not aligned with the screened set");
  }
  CleanResult out;
  out.s_hat = s_hat;
  out.t_values = t_values;
  out.alpha = options.alpha;
  out.mode = options.mode;
  if (s_hat.empty()) return out;
  const auto m = static_cast<Index>(s_hat.size());
  out.critical = options.mode == SplitMode::TriSplit
                     ? critical_trisplit(options.alpha, m, options.family, df)
                     : critical_twosplit(options.alpha, options.n, options.k_n, options.p_n);
  for (Index k = 0; k < m; ++k) {
    if (std::abs(t_values(k)) > out.critical) out.d_hat.push_back(s_hat[static_cast<std::size_t>(k)]);
  }
  return out;
}

CleanResult clean(const OlsFit& fit, const CleanOptions& options) {
  if (fit.model.empty()) {
    CleanResult out;
    out.alpha = options.alpha;
    out.mode = options.mode;
    return out;
  }
  Eigen::VectorXd t;
  try {
    t = t_statistics(fit);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroResidualVariance) throw;
    // Exact fit on held-out rows: keep every screened variable, flagged.
    Eigen::VectorXd inf(fit.coefficients.size());
    for (Index k = 0; k < inf.size(); ++k) {
      inf(k) = fit.coefficients(k) < 0 ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
    }
    CleanResult out = clean_t_values(fit.model, inf, options, fit.df);
    out.d_hat = fit.model;
    out.coefficients = fit.coefficients;
    out.perfect_fit = true;
    return out;
  }
  CleanResult out = clean_t_values(fit.model, t, options, fit.df);
  out.coefficients = fit.coefficients;
  return out;
}

}  // namespace screenclean
