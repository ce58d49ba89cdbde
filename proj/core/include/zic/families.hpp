#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "zic/links.hpp"

namespace zic {

enum class Family { po, nb, zip, zinb, zipig, zibnb };

/// Count family with parameters on their natural scale, ordered
/// (mu[, sigma[, nu[, tau]]]).  mu is always the mean of the
/// non-inflated part; zero-inflation probabilities live in the slot
/// named by is_inflation().
struct FamilySpec {
  Family id = Family::po;

  static FamilySpec from_name(std::string_view name);
  std::string_view name() const;

  int n_params() const;
  std::string_view param_name(int k) const;
  Link default_link(int k) const;
  bool is_inflation(int k) const;
};

/// ln P(Y = y).  Returns -inf outside the support; throws
/// std::domain_error for parameters outside their closed domains.
/// Inflation probabilities in [1 - 1e-10, 1] are clamped down to
/// 1 - 1e-10; dispersion 0 evaluates the exact limiting family.
double log_pmf(const FamilySpec& f, std::span<const double> params, long y);

/// P(Y <= y) by cumulative summation of the pmf (Kahan).
double cdf(const FamilySpec& f, std::span<const double> params, long y);

/// Analytic mean.
double mean(const FamilySpec& f, std::span<const double> params);

/// Smallest Y with P(Y <= y) >= 1 - 1e-12, capped at 1e6.
long truncation_point(const FamilySpec& f, std::span<const double> params);

/// n draws by inversion of the cdf.  Uniforms are built from the raw
/// 64-bit stream as (x >> 11) * 2^-53 so sequences are reproducible
/// across standard libraries.
std::vector<long> sample(const FamilySpec& f, std::span<const double> params,
                         std::mt19937_64& rng, std::size_t n);

}  // namespace zic
