#pragma once

namespace zic {

// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a+b), a > 0, b > 0.
double log_beta(double a, double b);

// ln K_{m-1/2}(t) for integer m >= 0 and t > 0.
// Only half-integer orders are supported; K_{-1/2} = K_{1/2}.
double log_bessel_k_half(int m, double t);

// Standard normal cdf, symmetric by construction: cdf(-z) mirrors 1 - cdf(z).
double std_normal_cdf(double z);

// Inverse of std_normal_cdf on (0, 1).
double std_normal_quantile(double p);

}  // namespace zic
