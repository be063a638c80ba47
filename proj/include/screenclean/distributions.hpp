#pragma once

namespace screenclean {

/// P(Z <= x) for Z ~ N(0, 1).
double normal_cdf(double x);

/// z with P(Z > z) = upper for Z ~ N(0, 1). Acklam's rational approximation
/// followed by one Halley step against erfc; absolute error below 1e-12 on
/// (1e-300, 1).
double normal_upper_quantile(double upper);

/// Regularized incomplete beta I_x(a, b) (continued fraction, modified Lentz).
double incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

/// t with P(T > t) = upper.
double student_t_upper_quantile(double upper, double df);

}  // namespace screenclean
