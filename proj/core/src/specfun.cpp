#include "zic/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace zic {

namespace {

constexpr double kLnSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2*pi)

// Stirling series tail, valid once x is large enough that the omitted
// term (B_14 order, ~ 1/x^13) is below machine precision.
double stirling_tail(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  // Bernoulli coefficients B_{2k} / (2k (2k-1))
  return r * (1.0 / 12.0 +
              r2 * (-1.0 / 360.0 +
                    r2 * (1.0 / 1260.0 +
                          r2 * (-1.0 / 1680.0 +
                                r2 * (1.0 / 1188.0 +
                                      r2 * (-691.0 / 360360.0))))));
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be > 0");
  // Raise the argument past 12 where the Stirling series converges fast,
  // then undo via Gamma(x) = Gamma(x+k) / (x (x+1) ... (x+k-1)).
  double shift = 0.0;
  double z = x;
  while (z < 12.0) {
    shift += std::log(z);
    z += 1.0;
  }
  return (z - 0.5) * std::log(z) - z + kLnSqrt2Pi + stirling_tail(z) - shift;
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("log_beta: arguments must be > 0");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_bessel_k_half(int m, double t) {
  if (m < 0) throw std::domain_error("log_bessel_k_half: m must be >= 0");
  if (!(t > 0.0)) throw std::domain_error("log_bessel_k_half: t must be > 0");
  // K_{1/2}(t) = sqrt(pi/(2t)) e^{-t}; K_{-1/2} equals it by symmetry.
  const double lk_half = 0.5 * std::log(M_PI / (2.0 * t)) - t;
  if (m <= 1) return lk_half;
  // Upward recurrence K_{l+1} = K_{l-1} + (2l/t) K_l, all terms positive,
  // carried in log space: order l = j - 1/2 after j steps.
  double lo = lk_half;  // K_{j-3/2}
  double hi = lk_half;  // K_{j-1/2}
  for (int j = 1; j < m; ++j) {
    const double lstep = std::log((2.0 * j - 1.0) / t) + hi;
    const double mx = std::max(lo, lstep);
    const double next = mx + std::log(std::exp(lo - mx) + std::exp(lstep - mx));
    lo = hi;
    hi = next;
  }
  return hi;
}

double std_normal_cdf(double z) {
  const double tail = 0.5 * std::erfc(std::fabs(z) * M_SQRT1_2);
  return z < 0.0 ? tail : 1.0 - tail;
}

namespace {

// Acklam's rational approximation to the normal quantile, |rel err| < 1.2e-9,
// then polished below by one Newton step.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("std_normal_quantile: p must be in (0,1)");
  double z = quantile_seed(p);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  if (pdf > 0.0) z -= (std_normal_cdf(z) - p) / pdf;
  return z;
}

}  // namespace zic
