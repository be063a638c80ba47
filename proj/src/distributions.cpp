#include "screenclean/distributions.hpp"

#include "screenclean/error.hpp"

#include <cmath>
#include <limits>

namespace screenclean {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

// Lower-tail quantile, relative accuracy about 1e-9.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  if (p < low) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p <= 1 - low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  const double q = std::sqrt(-2 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1;
  const double qam = a - 1;
  double c = 1;
  double d = 1 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1) < kEps) return h;
  }
  throw Error(ErrorKind::NoConvergence, "incomplete beta continued fraction");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_upper_quantile(double upper) {
  if (!(upper > 0 && upper < 1)) {
    throw Error(ErrorKind::DomainError, "normal quantile level must be in (0, 1)");
  }
  // Work in the upper tail: z solves Q(z) = upper with Q(z) = erfc(z / sqrt2) / 2.
  double z = -acklam(upper);
  for (int step = 0; step < 2; ++step) {
    const double err = 0.5 * std::erfc(z / kSqrt2) - upper;
    const double density = std::exp(-0.5 * z * z) / kSqrt2Pi;
    if (density == 0) break;
    // Halley on Q(z) - upper = 0, with Q' = -density, Q'' = z * density.
    const double u = -err / density;
    z = z - u / (1 + 0.5 * z * u);
  }
  return z;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw Error(ErrorKind::DomainError, "incomplete beta needs a, b > 0");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(a, b, x) / a;
  return 1 - front * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0)) throw Error(ErrorKind::DomainError, "t distribution needs df > 0");
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t >= 0 ? tail : 1 - tail;
}

double student_t_upper_quantile(double upper, double df) {
  if (!(upper > 0 && upper < 1)) {
    throw Error(ErrorKind::DomainError, "t quantile level must be in (0, 1)");
  }
  if (!(df > 0)) throw Error(ErrorKind::DomainError, "t distribution needs df > 0");
  if (upper > 0.5) return -student_t_upper_quantile(1 - upper, df);
  // Bracket then bisect; the tail is monotone decreasing in t.
  double lo = 0;
  double hi = std::max(1.0, normal_upper_quantile(upper));
  while (student_t_upper_tail(hi, df) > upper) {
    lo = hi;
    hi *= 2;
    if (!std::isfinite(hi)) throw Error(ErrorKind::NoConvergence, "t quantile bracket");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_upper_tail(mid, df) > upper) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace screenclean
