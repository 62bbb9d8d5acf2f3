#include "quicfl/normal.hpp"

#include <cmath>
#include <numbers>

#include "quicfl/error.hpp"

namespace quicfl {

namespace {

// Acklam's rational approximation, relative error around 1e-9.
double acklam(double u) {
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
  constexpr double lo = 0.02425;
  if (u < lo) {
    double q = std::sqrt(-2 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (u > 1 - lo) {
    double q = std::sqrt(-2 * std::log1p(-u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double q = u - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
}

double normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_quantile(double u) {
  if (!(u > 0 && u < 1)) throw DomainError("normal_quantile needs u in (0,1)");
  // Newton on the side where the CDF has full relative precision.
  bool upper = u > 0.5;
  double v = upper ? 1 - u : u;
  double z = acklam(v);
  for (int i = 0; i < 2; ++i) {
    double err = normal_cdf(z) - v;
    z -= err / normal_pdf(z);
  }
  return upper ? -z : z;
}

double compute_threshold(double p) {
  if (!(p > 0 && p <= 1)) throw DomainError("p must lie in (0, 1]");
  if (p == 1) return 0.0;
  return -normal_quantile(p / 2);
}

double compute_threshold(const Rational& p) {
  if (p.num <= 0 || p.den <= 0 || p.num > p.den) {
    throw DomainError("p=" + p.str() + " must lie in (0, 1]");
  }
  return compute_threshold(p.value());
}

std::vector<double> compute_quantiles(int m, double threshold) {
  if (m < 2) throw DomainError("need at least 2 quantiles");
  if (!(threshold > 0) || !std::isfinite(threshold)) {
    throw DomainError("threshold must be positive and finite");
  }
  const double lo = normal_cdf(-threshold);
  const double span = normal_cdf(threshold) - lo;
  std::vector<double> q(m);
  q[0] = -threshold;
  q[m - 1] = threshold;
  // Solve the lower half by bisection and mirror it.
  for (int i = 1; i <= (m - 1) / 2; ++i) {
    double target = lo + span * static_cast<double>(i) / (m - 1);
    double a = -threshold, b = 0.0;
    while (b - a > 1e-12) {
      double mid = 0.5 * (a + b);
      if (normal_cdf(mid) < target) a = mid; else b = mid;
    }
    double z = 0.5 * (a + b);
    q[i] = z;
    q[m - 1 - i] = -z;
  }
  if (m % 2 == 1) q[(m - 1) / 2] = 0.0;
  return q;
}

}  // namespace quicfl
